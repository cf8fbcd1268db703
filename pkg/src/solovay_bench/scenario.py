"""Scenario files: named reals, witnesses, tests and a task graph.

A scenario is an INI file. ``[budget]`` holds defaults; ``[real NAME]``,
``[witness NAME]`` and ``[test NAME]`` declare objects; ``[task NAME]``
declares a check or construction with ``op = ...``. Tasks run in dependency
order: explicit ``after = a, b`` plus any object another task ``produces``.
A task marked ``expect = fail`` counts as passing exactly when it fails.

Reports and CSVs contain no timing, so replays are byte-identical.
"""

from __future__ import annotations

import configparser
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import Callable

from .constructions import (
    PairedApproximations,
    build_prop4_instance,
    extraction_is_leftce,
    interp_Q_witness,
    leftce_from_R,
    leftce_from_monotone,
    monotone_from_leftce,
    piecewise_linear_R,
)
from .kernel import (
    Budget,
    EffectiveApprox,
    Interval,
    LeftCEApprox,
    WorkbenchError,
    format_rational,
    geometric_leftce,
    parse_interval,
    pow2,
    rat,
    table_leftce,
    validate_effective,
)
from .pipeline import Pipeline, PipelineConfig, check_claims, h_machine
from .randomness import (
    check_fails_on,
    check_hit_propagation,
    check_measure,
    default_rho,
    interval_list_test,
    nested_test,
    total_measure_gap,
    transform_test,
    transform_total_test,
)
from .type2 import AffineMachine, ConstantApprox, LogisticMachine
from .witnesses import (
    CheckReport,
    QWitness,
    RealName,
    RWitness,
    Verdict,
    affine_witness,
    check_left_of_limit,
    check_lipschitz_Q,
    check_monotone,
    check_R_witness,
    check_solovay_condition,
    make_constant_witness,
    table_witness,
)


class ScenarioError(WorkbenchError):
    """Parse, reference or budget error, carrying its location."""


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.replace("\n", ",").split(",") if t.strip()]


def _bool(text: str) -> bool:
    return text.strip().lower() in ("1", "yes", "true", "on")


# -- reports ---------------------------------------------------------------


@dataclass
class TaskResult:
    name: str
    op: str
    checks: list[CheckReport] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)
    tables: dict[str, tuple[list[str], list[list[str]]]] = field(default_factory=dict)
    expect_fail: bool = False
    error: str | None = None
    seconds: float = 0.0

    @property
    def actual(self) -> Verdict:
        if self.error is not None:
            return Verdict.INCONCLUSIVE
        vs = [c.verdict for c in self.checks]
        if Verdict.FAIL in vs:
            return Verdict.FAIL
        if Verdict.INCONCLUSIVE in vs or not vs:
            return Verdict.INCONCLUSIVE
        return Verdict.PASS

    @property
    def verdict(self) -> Verdict:
        """Contribution to the scenario outcome, after expect-fail inversion."""
        v = self.actual
        if not self.expect_fail or v is Verdict.INCONCLUSIVE:
            return v
        return Verdict.PASS if v is Verdict.FAIL else Verdict.FAIL

    def render(self) -> list[str]:
        tag = " expect=fail" if self.expect_fail else ""
        out = [f"task {self.name} op={self.op} verdict={self.verdict.value} "
               f"actual={self.actual.value}{tag}"]
        if self.error:
            out.append(f"  error: {self.error}")
        for c in self.checks:
            out.append(f"  {c.line()}")
            for v in c.violations[1:]:
                out.append(f"    violation: {v}")
            for n in c.notes[:3]:
                out.append(f"    note: {n}")
        out.extend(f"  {l}" for l in self.lines)
        return out


@dataclass
class Report:
    scenario: str
    tasks: dict[str, TaskResult]
    order: list[str]

    @property
    def exit_code(self) -> int:
        vs = [self.tasks[t].verdict for t in self.order]
        if Verdict.FAIL in vs:
            return 1
        if Verdict.INCONCLUSIVE in vs:
            return 2
        return 0

    def render(self) -> str:
        out = [f"scenario {self.scenario}"]
        for t in self.order:
            out.extend(self.tasks[t].render())
        word = {0: "pass", 1: "fail", 2: "inconclusive"}[self.exit_code]
        out.append(f"result {word} exit={self.exit_code}")
        return "\n".join(out) + "\n"

    def timings(self) -> str:
        return "\n".join(f"{t} {self.tasks[t].seconds:.3f}s" for t in self.order) + "\n"


def csv_text(header: list[str], rows: list[list[str]]) -> str:
    """Bit-stable CSV: header row, exact num/den cells, LF endings."""
    lines = [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    return "\n".join(lines) + "\n"


def emit_csv(report: Report, task: str, directory: str | Path) -> list[Path]:
    if task not in report.tasks:
        raise ScenarioError(f"unknown task {task!r}")
    res = report.tasks[task]
    if not res.tables:
        raise ScenarioError(f"task {task!r} produced no tabular data")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for label, (header, rows) in sorted(res.tables.items()):
        path = directory / f"{report.scenario}.{task}.{label}.csv"
        path.write_bytes(csv_text(header, rows).encode("ascii"))
        paths.append(path)
    return paths


# -- the object registry ---------------------------------------------------


class Registry:
    """Lazily built objects keyed by name; tasks may add produced objects."""

    def __init__(self, scenario: "Scenario"):
        self.sc = scenario
        self.objects: dict[str, object] = {}

    def get(self, name: str, where: str):
        if name in self.objects:
            return self.objects[name]
        sec = self.sc.declared.get(name)
        if sec is None:
            raise ScenarioError(f"{where}: unresolved reference {name!r}")
        kind, body = sec
        try:
            obj = {"real": self._real, "witness": self._witness, "test": self._test}[kind](name, body)
        except WorkbenchError as exc:
            raise ScenarioError(f"[{kind} {name}]: {exc}") from None
        except (KeyError, ValueError) as exc:
            raise ScenarioError(f"[{kind} {name}]: bad or missing field {exc}") from None
        self.objects[name] = obj
        return obj

    def real(self, name, where) -> RealName:
        obj = self.get(name, where)
        if not isinstance(obj, RealName):
            raise ScenarioError(f"{where}: {name!r} is not a real")
        return obj

    def stream(self, name, where) -> LeftCEApprox:
        x = self.real(name, where)
        if not isinstance(x.lower, LeftCEApprox):
            raise ScenarioError(f"{where}: {name!r} has no left-c.e. stream")
        return x.lower

    def _real(self, name, s):
        kind = s["kind"]
        if kind == "exact":
            return RealName.rational(name, s["value"])
        if kind == "geometric":
            target = rat(s["target"])
            a = geometric_leftce(target, rat(s.get("ratio", "1/2")), label=name)
            return RealName(name, lower=a, upper_bounds=lambda k: target)
        if kind == "table":
            a = table_leftce([rat(v) for v in _split(s["values"])], label=name)
            up = s.get("upper")
            return RealName(name, lower=a, upper_bounds=(lambda k: rat(up)) if up else None)
        if kind == "dyadic-cauchy":
            # truncations of a rational to k binary digits: an effective approximation
            x = rat(s["value"])
            approx = EffectiveApprox(lambda k: Fraction(int(x * 2**k), 2**k), label=name)
            return RealName(name, lower=approx)
        raise ScenarioError(f"[real {name}]: unknown kind {kind!r}")

    def _witness(self, name, s):
        kind = s["kind"]
        where = f"[witness {name}]"
        if kind == "affine":
            return affine_witness(s.get("p", "0"), s.get("s", "1"), s.get("c", "1"),
                                  s.get("domain", "canonical"), name=name)
        if kind == "constant-q":
            return affine_witness(s["value"], 0, s.get("c", "1"), s.get("domain", "dyadic"), name=name)
        if kind == "table":
            table = {}
            for item in _split(s["entries"]):
                q, g = item.split(":")
                table[rat(q)] = rat(g)
            return table_witness(table, s.get("c", "1"), name=name)
        if kind == "interp":
            a, b = self.stream(s["alpha"], where), self.stream(s["beta"], where)
            pa = PairedApproximations(a, b, s.get("d", "1"), int(s.get("check_depth", "16")))
            return interp_Q_witness(pa, name=name)
        if kind == "step":
            a, b = self.stream(s["alpha"], where), self.stream(s["beta"], where)
            return monotone_from_leftce(a, b, s.get("direction", "backward"), s.get("c", "1"), name=name)
        if kind == "constant-r":
            w = make_constant_witness(s["value"])
            w.name = name
            return w
        if kind == "affine-r":
            m = AffineMachine(s.get("p", "0"), s.get("s", "1"))
            bound = rat(s["bound"]) if "bound" in s else None
            return RWitness(m, s.get("c", "1"), s.get("mode", "cl-open"), bound, name)
        if kind == "logistic-r":
            return RWitness(LogisticMachine(), 4, s.get("mode", "cl-open"), None, name)
        if kind == "pl-r":
            a, b = self.stream(s["alpha"], where), self.stream(s["beta"], where)
            c = s.get("c")
            return piecewise_linear_R(a, b, rat(c) if c else None, s.get("mode", "real"), name)
        if kind == "pipeline":
            src = self.get(s["source"], where)
            if not isinstance(src, QWitness):
                raise ScenarioError(f"{where}: source must be a rational witness")
            K = int(s["K"]) if "K" in s else None
            w = h_machine(src, PipelineConfig(src.c, K, s.get("domain_bound")))
            w.name = name
            return w
        raise ScenarioError(f"{where}: unknown kind {kind!r}")

    def _test(self, name, s):
        kind = s["kind"]
        if kind == "intervals":
            ivs = [parse_interval("[" + t.strip().strip("[]") + "]")
                   for t in s["intervals"].replace("]", "];").split(";") if t.strip()]
            return interval_list_test(ivs, name)
        if kind == "nested":
            return nested_test(self.real(s["center"], f"[test {name}]"),
                               rat(s.get("ratio", "1/2")), name)
        if kind == "nested-below":
            # S_n centered just below the n+2 stage term, radius 2^-(n+3)
            a = self.stream(s["center"], f"[test {name}]")
            count = int(s.get("count", "12"))
            ivs = [Interval(a[n + 2] - pow2(-(n + 3)), a[n + 2] + pow2(-(n + 3))) for n in range(count)]
            return interval_list_test(ivs, name)
        raise ScenarioError(f"[test {name}]: unknown kind {kind!r}")


# -- scenarios -------------------------------------------------------------


@dataclass
class Scenario:
    name: str
    path: str
    budget: Budget
    declared: dict[str, tuple[str, dict[str, str]]]
    tasks: dict[str, dict[str, str]]
    task_order: list[str]

    def dependencies(self) -> dict[str, set[str]]:
        producers = {}
        for t, body in self.tasks.items():
            for p in _split(body.get("produces", "")):
                producers[p] = t
                producers.update({f"{p}.{k}": t for k in ("alpha", "beta", "g", "prefix")})
        deps = {}
        for t, body in self.tasks.items():
            d = set(_split(body.get("after", "")))
            for key, value in body.items():
                if key in ("after", "produces", "op", "expect"):
                    continue
                for ref in _split(value):
                    if ref in producers and producers[ref] != t:
                        d.add(producers[ref])
            for r in d:
                if r not in self.tasks:
                    raise ScenarioError(f"[task {t}]: unknown dependency {r!r}")
            deps[t] = d
        return deps

    def execution_order(self) -> list[str]:
        ts = TopologicalSorter(self.dependencies())
        try:
            ts.prepare()
        except CycleError as exc:
            raise ScenarioError(f"task cycle: {exc.args[1]}") from None
        order = []
        rank = {t: i for i, t in enumerate(self.task_order)}
        while ts.is_active():
            ready = sorted(ts.get_ready(), key=rank.__getitem__)
            order.extend(ready)
            ts.done(*ready)
        return order


def load_scenario(path: str | Path, overrides: dict | None = None) -> Scenario:
    path = Path(path)
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    b = dict(cp["budget"]) if cp.has_section("budget") else {}
    try:
        budget = Budget(
            fuel=int(overrides.get("fuel", b.get("fuel", 20_000))),
            depth=int(overrides.get("depth", b.get("depth", 8))),
            tolerance_index=int(b.get("tolerance_index", 6)),
        )
    except ValueError as exc:
        raise ScenarioError(f"{path} [budget]: {exc}") from None
    name = cp.get("scenario", "name", fallback=path.stem)
    declared, tasks, order = {}, {}, []
    for sec in cp.sections():
        head, _, label = sec.partition(" ")
        if head in ("scenario", "budget"):
            continue
        if head not in ("real", "witness", "test", "task") or not label:
            raise ScenarioError(f"{path}: unexpected section [{sec}]")
        if head == "task":
            if "op" not in cp[sec]:
                raise ScenarioError(f"{path} [{sec}]: missing op")
            tasks[label] = dict(cp[sec])
            order.append(label)
        else:
            if label in declared:
                raise ScenarioError(f"{path} [{sec}]: duplicate name")
            declared[label] = (head, dict(cp[sec]))
    sc = Scenario(name, str(path), budget, declared, tasks, order)
    sc.execution_order()
    return sc


def _task_budget(sc: Scenario, body: dict) -> Budget:
    """Scenario budget (after command-line overrides) with task-level keys on top."""
    b = sc.budget
    fields = {}
    for key in ("fuel", "depth", "tolerance_index"):
        if key in body:
            fields[key] = int(body[key])
    return b.replace(**fields) if fields else b


def run_scenario(path: str | Path, overrides: dict | None = None,
                 task_filter: Callable[[str], bool] | None = None) -> Report:
    """Run every task (or those passing ``task_filter`` and their dependencies)."""
    overrides = overrides or {}
    sc = load_scenario(path, overrides)
    order = sc.execution_order()
    if task_filter is not None:
        deps = sc.dependencies()
        keep: set[str] = set()
        stack = [t for t in order if task_filter(t)]
        if not stack:
            raise ScenarioError("task filter matched no task")
        while stack:
            t = stack.pop()
            if t not in keep:
                keep.add(t)
                stack.extend(deps[t])
        order = [t for t in order if t in keep]
    reg = Registry(sc)
    results = {}
    for t in order:
        body = sc.tasks[t]
        op = body["op"]
        res = TaskResult(t, op, expect_fail=body.get("expect", "pass").strip() == "fail")
        handler = OPS.get(op)
        start = time.perf_counter()
        if handler is None:
            raise ScenarioError(f"[task {t}]: unknown op {op!r}")
        try:
            handler(reg, body, _task_budget(sc, body), res, f"[task {t}]")
        except ScenarioError:
            raise
        except (WorkbenchError, ArithmeticError) as exc:
            res.error = f"{type(exc).__name__}: {exc}"
        res.seconds = time.perf_counter() - start
        results[t] = res
    return Report(sc.name, results, order)


# -- task handlers ---------------------------------------------------------


def _samples(reg: Registry, body: dict, w, b: Budget, where: str):
    spec = body.get("samples")
    if spec is None:
        return None
    if spec == "domain":
        return w.domain_prefix(int(body.get("sample_count", 4 * b.depth)))
    if spec.startswith("prefix:"):
        return reg.real(spec[len("prefix:"):], where).prefix_samples(b.depth)
    return [rat(v) for v in _split(spec)]


def _qw(reg, name, where) -> QWitness:
    w = reg.get(name, where)
    if not isinstance(w, QWitness):
        raise ScenarioError(f"{where}: {name!r} is not a rational witness")
    return w


def _rw(reg, name, where) -> RWitness:
    w = reg.get(name, where)
    if not isinstance(w, RWitness):
        raise ScenarioError(f"{where}: {name!r} is not a real witness")
    return w


def op_check_solovay(reg, body, b, res, where):
    w = _qw(reg, body["witness"], where)
    sv = rat(body["slack"]) if "slack" in body else None
    res.checks.append(check_solovay_condition(
        w, reg.real(body["alpha"], where), reg.real(body["beta"], where), b,
        _samples(reg, body, w, b, where), sv))


def op_check_lipschitz(reg, body, b, res, where):
    w = _qw(reg, body["witness"], where)
    res.checks.append(check_lipschitz_Q(w, body.get("d", w.c), b, _samples(reg, body, w, b, where)))


def op_check_monotone(reg, body, b, res, where):
    w = _qw(reg, body["witness"], where)
    res.checks.append(check_monotone(w, b, _samples(reg, body, w, b, where),
                                     _bool(body.get("strict", "no"))))


def op_check_left_of_limit(reg, body, b, res, where):
    w = _qw(reg, body["witness"], where)
    res.checks.append(check_left_of_limit(w, reg.real(body["alpha"], where),
                                          reg.real(body["beta"], where), b,
                                          _samples(reg, body, w, b, where)))


def op_check_r_witness(reg, body, b, res, where):
    w = _rw(reg, body["witness"], where)
    samples = [rat(v) for v in _split(body["samples"])] if "samples" in body else None
    res.checks.append(check_R_witness(w, reg.real(body["alpha"], where),
                                      reg.real(body["beta"], where), b, samples))
    if _bool(body.get("outputs", "no")):
        res.checks.append(_check_outputs(w, samples or [], b))


def _check_outputs(w: RWitness, points, b: Budget) -> CheckReport:
    """The machine's outputs at each point form an effective approximation."""
    rep = CheckReport(w.name, "outputs-effective")
    for x in points:
        try:
            outs = w.machine.outputs(ConstantApprox(x), b.depth, b)
        except WorkbenchError:
            rep.exhausted += 1
            continue
        rep.samples += 1
        if not validate_effective(outs):
            rep.violation(f"outputs at {format_rational(x)} are not an effective approximation")
    return rep


def op_check_effective(reg, body, b, res, where):
    """Random effective-approximation prefixes (deterministic seed) or a named real's prefix."""
    rep = CheckReport(body.get("real", "generated"), "effective-approximation")
    if "real" in body:
        x = reg.real(body["real"], where)
        prefixes = [x.lower.prefix(b.depth)]
    else:
        rng = random.Random(int(body.get("seed", "0")))
        prefixes = [_random_effective(rng, int(body.get("length", "16")))
                    for _ in range(int(body.get("count", "100")))]
    for p in prefixes:
        rep.samples += 1
        if not validate_effective(p):
            rep.violation("consecutive gap bound broken")
            continue
        for n in range(len(p)):
            for m in range(n + 1, len(p)):
                if not abs(p[n] - p[m]) < pow2(-(n - 1)):
                    rep.violation(f"|q_{n} - q_{m}| >= 2^-{n - 1}")
    res.checks.append(rep)


def _random_effective(rng: random.Random, length: int) -> list[Fraction]:
    q = Fraction(rng.randrange(0, 1 << 10), 1 << 10)
    out = [q]
    for n in range(length - 1):
        step = pow2(-n) * Fraction(rng.randrange(-999, 1000), 1000)
        q = q + step
        out.append(q)
    return out


def op_extract(reg, body, b, res, where):
    """Extract a left-c.e. approximation; check it increases and its gap to
    ``target`` at least halves between the two sample depths."""
    stream = reg.stream(body["stream"], where)
    direction = body.get("direction", "backward")
    length = int(body.get("length", "16"))
    w = reg.get(body["witness"], where)
    if isinstance(w, QWitness):
        e = leftce_from_monotone(w, stream, direction, b, length)
    else:
        e = leftce_from_R(w, stream, direction, b, length)
    rep = CheckReport(body["witness"], f"extraction-{direction}")
    if e.inconclusive:
        rep.exhausted += 1
        rep.notes.append(e.note)
    if e.prefix:
        rep.samples += 1
    if e.prefix and not extraction_is_leftce(e):
        rep.violation("extracted prefix is not strictly increasing in [0,1)")
    if "target" in body and len(e.prefix) >= 2:
        target = reg.real(body["target"], where)
        lo_n, hi_n = (int(v) for v in _split(body.get("gap_at", "8,16")))
        tv = target.best(64)
        if len(e.prefix) >= hi_n:
            g1, g2 = tv - e.prefix[lo_n - 1], tv - e.prefix[hi_n - 1]
            rep.samples += 1
            res.lines.append(f"gap N={lo_n}: {format_rational(g1)} gap N={hi_n}: {format_rational(g2)}")
            if not 2 * g2 <= g1:
                rep.violation(f"gap did not halve: {format_rational(g1)} -> {format_rational(g2)}")
    res.checks.append(rep)
    res.tables["prefix"] = (["index", "value"],
                            [[str(i), format_rational(v)] for i, v in enumerate(e.prefix)])
    if "produces" in body:
        name = _split(body["produces"])[0]
        reg.objects[f"{name}.prefix"] = RealName(f"{name}.prefix", lower=table_leftce(e.prefix))


def op_separation_instance(reg, body, b, res, where):
    depth = int(body.get("instance_depth", b.depth))
    inst = build_prop4_instance(depth)
    rep = CheckReport("separation", "partial-measure")
    rep.samples = 1
    expected = (1 - pow2(-2 * depth)) / 3
    if inst.partial_measure != expected:
        rep.violation(f"partial measure {inst.partial_measure} != {expected}")
    res.checks.append(rep)
    lo, hi = inst.beta.enclosure(inst.beta_depth)
    res.lines.append(f"beta in [{format_rational(lo)},{format_rational(hi)}] at stage {inst.beta_depth}")
    res.lines.append(f"certified q_n: {','.join(str(n) for n in inst.certified)}")
    res.tables["intervals"] = (["n", "q_n", "lo", "hi", "g"], [
        [str(n), format_rational(q), format_rational(I.lo), format_rational(I.hi), format_rational(inst.g(n))]
        for n, (q, I) in enumerate(zip(inst.qs, inst.intervals), start=1)])
    name = _split(body.get("produces", "separation"))[0]
    reg.objects[f"{name}.alpha"] = inst.alpha
    reg.objects[f"{name}.beta"] = inst.beta
    reg.objects[f"{name}.g"] = inst.witness


def op_pipeline_claims(reg, body, b, res, where):
    w = _qw(reg, body["witness"], where)
    K = int(body["K"]) if "K" in body else None
    pipe = Pipeline(w, PipelineConfig(w.c, K))
    alpha, beta = reg.real(body["alpha"], where), reg.real(body["beta"], where)
    rng = random.Random(int(body.get("seed", "0")))
    count, max_n = int(body.get("tuples", "50")), int(body.get("max_n", "9"))
    den = int(body.get("denominator", "128"))
    hi = beta.enclosure(b.depth)[0]
    top = max(2, int(hi * den))
    tuples = []
    while len(tuples) < count:
        qn = rng.randrange(1, top)
        q, p = Fraction(qn, den), Fraction(rng.randrange(0, qn), den)
        m = rng.randrange(1, max_n)
        tuples.append((q, p, m, rng.randrange(m + 1, max_n + 1)))
    reps = check_claims(pipe, alpha, beta, tuples, b)
    res.checks.extend(reps[k] for k in reps if not k.endswith("-weak"))
    res.lines.extend(f"diagnostic {reps[k].line()}" for k in reps if k.endswith("-weak"))
    rows = []
    for q, _, _, n in tuples[: int(body.get("table_rows", "20"))]:
        q_, n_, size, f, ft = pipe.stage_row(q, n)
        rows.append([format_rational(q_), str(n_), str(size), format_rational(f), format_rational(ft)])
    res.tables["stages"] = (["q", "n", "P_size", "f", "ftilde"], rows)


def op_transform(reg, body, b, res, where):
    s = reg.get(body["test"], where)
    w = _rw(reg, body["witness"], where)
    alpha, beta = reg.real(body["alpha"], where), reg.real(body["beta"], where)
    total = _bool(body.get("total", "no"))
    if total:
        rho = rat(body["rho"]) if "rho" in body else default_rho(beta, w, b.depth)
        t = transform_total_test(s, w, rho, b)
        res.lines.append(f"rho={format_rational(rho)} undefined={t.undefined}")
    else:
        t = transform_test(s, w, b)
    mrep = check_measure(t)
    if total:
        gap, tail = total_measure_gap(t)
        res.lines.append(f"limit gap {format_rational(gap)} tail {format_rational(tail)}")
        mrep.samples += 1
        if not gap <= tail:
            mrep.violation(f"measure gap {gap} exceeds certified tail {tail}")
    res.checks.append(mrep)
    res.checks.append(check_hit_propagation(t, alpha, beta, b))
    src_hits = check_fails_on(s, beta, b)
    hits = check_fails_on(t, alpha, b)
    res.lines.append(f"source {src_hits.line()}")
    res.lines.append(f"transformed {hits.line()}")
    res.tables["transform"] = (["n", "l_n", "r_n", "defined", "hit"], hits.csv_rows())
    res.tables["measure"] = (["N", "partial_measure", "bound"], [
        [str(N), format_rational(m), format_rational(bd)] for N, m, bd in t.measure_rows()])


def op_fails_on(reg, body, b, res, where):
    s = reg.get(body["test"], where)
    x = reg.real(body["real"], where)
    hits = check_fails_on(s, x, b)
    rep = CheckReport(body["test"], f"hits-on-{x.label}")
    rep.samples = len(hits.rows)
    need = int(body.get("min_hits", "1"))
    if hits.hits < need:
        rep.violation(f"only {hits.hits} certified hits, expected at least {need}")
    res.checks.append(rep)
    res.lines.append(hits.line())
    res.tables["hits"] = (["n", "l_n", "r_n", "defined", "hit"], hits.csv_rows())


OPS = {
    "check-solovay": op_check_solovay,
    "check-lipschitz": op_check_lipschitz,
    "check-monotone": op_check_monotone,
    "check-left-of-limit": op_check_left_of_limit,
    "check-r-witness": op_check_r_witness,
    "check-effective": op_check_effective,
    "extract": op_extract,
    "separation-instance": op_separation_instance,
    "pipeline-claims": op_pipeline_claims,
    "transform": op_transform,
    "fails-on": op_fails_on,
}


def bundled_scenarios() -> list[Path]:
    return sorted((Path(__file__).parent / "scenarios").glob("*.ini"))
