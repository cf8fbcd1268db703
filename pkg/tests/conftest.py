import sys
from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "exact",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("exact")


def effective_prefixes(max_len: int = 24):
    """Prefixes with |q_n - q_{n+1}| < 2^-n, built from bounded dyadic steps."""

    @st.composite
    def build(draw):
        length = draw(st.integers(1, max_len))
        q = Fraction(draw(st.integers(0, 255)), 256)
        out = [q]
        for n in range(length - 1):
            scale = 1 << (n + 6)
            k = draw(st.integers(-63, 63))
            q = q + Fraction(k, scale)
            out.append(q)
        return out

    return build()


unit_rationals = st.builds(
    lambda num, den: Fraction(num % den, den),
    st.integers(0, 10**6),
    st.integers(1, 512),
)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.SUMMARY:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.SUMMARY):
        terminalreporter.write_line(mod.SUMMARY[n])
