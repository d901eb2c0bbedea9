"""Verification suite: runs every additive and multiplicative check on one group."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable

from . import additive as add
from . import multiplicative as mul
from .errors import InputError, PrecisionExhausted, WhiteheadLabError
from .groups import FiniteGroup, group_fingerprint
from .grouprings import GroupRingElt, group_basis
from .padic import PrecisionContext, howell_form, submodule_equal

FAMILIES = ("additive", "k1", "lattice")


@dataclass
class SuiteConfig:
    group: FiniteGroup
    ctx: PrecisionContext
    unit_samples: int = 100  # L integrality / additivity / omega
    heavy_samples: int = 20  # theta, key identity, M1-M4
    tuple_samples: int = 20  # random members of the tuple module
    lattice_samples: int = 200
    families: tuple[str, ...] = FAMILIES
    # test hooks: applied to the tuples built from the first sample
    tamper_phi: Callable[[add.PhiTuple], add.PhiTuple] | None = None
    tamper_psi: Callable[[mul.PsiTuple], mul.PsiTuple] | None = None

    def __post_init__(self) -> None:
        for name in ("unit_samples", "heavy_samples", "tuple_samples", "lattice_samples"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be at least 1")
        bad = set(self.families) - set(FAMILIES)
        if bad:
            raise InputError(f"unknown check families {sorted(bad)}")
        if self.ctx.p != self.group.p:
            raise InputError("precision context prime differs from the group's prime")

    def to_dict(self) -> dict:
        return {
            "p": self.ctx.p,
            "n_work": self.ctx.n_work,
            "n_check": self.ctx.n_check,
            "seed": self.ctx.seed,
            "unit_samples": self.unit_samples,
            "heavy_samples": self.heavy_samples,
            "tuple_samples": self.tuple_samples,
            "lattice_samples": self.lattice_samples,
            "families": list(self.families),
        }


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: int | None = None  # capped at n_check
    witnesses: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "residual": self.residual,
            "witnesses": self.witnesses,
            "info": self.info,
        }


@dataclass
class SuiteReport:
    group: str
    order: int
    p: int
    fingerprint: str
    config: dict
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        return next(c for c in self.checks if c.name == name)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        # wall times are left out so that reports are byte-identical across runs
        return {
            "group": self.group,
            "order": self.order,
            "p": self.p,
            "fingerprint": self.fingerprint,
            "config": self.config,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


class _Tracker:
    """Running minimum of residuals plus a bounded witness list."""

    def __init__(self, n_check: int):
        self.n = n_check
        self.residual = n_check
        self.witnesses: list = []
        self.passed = True

    def see(self, r: int, witness=None) -> None:
        r = min(r, self.n)
        self.residual = min(self.residual, r)
        if r < self.n:
            self.fail(witness)

    def fail(self, witness=None) -> None:
        self.passed = False
        if witness is not None and len(self.witnesses) < 8:
            self.witnesses.append(witness)

    def result(self, name: str, **info) -> CheckResult:
        return CheckResult(name, self.passed, self.residual, self.witnesses, info)


# -- additive checks ---------------------------------------------------------------------


def _zero_residual(x: GroupRingElt, n: int) -> int:
    return x.residual_checked(GroupRingElt.zero(x.basis, x.p, x.prec), n)


def _class_vectors(G: FiniteGroup, prec: int) -> list[GroupRingElt]:
    return [add.class_vector(G, c, prec) for c in range(len(G.classes))]


def check_tau_beta(G: FiniteGroup, ctx: PrecisionContext) -> CheckResult:
    tr = _Tracker(ctx.n_check)
    for c, a in enumerate(_class_vectors(G, ctx.n_work)):
        tr.see(add.tau(G, add.beta_cyclic(G, a)).residual_checked(a, ctx.n_check), {"class": c})
    return tr.result("additive.tau_beta")


def check_beta_conditions(G: FiniteGroup, ctx: PrecisionContext, tamper=None) -> CheckResult:
    tr = _Tracker(ctx.n_check)
    for c, a in enumerate(_class_vectors(G, ctx.n_work)):
        for shape in add.SHAPES:
            t = add.beta_shape(G, shape, a)
            if tamper is not None and c == 0:
                t = tamper(t)
            rep = add.check_phi_conditions(G, t, ctx.n_check)
            for k in rep.failed():
                tr.fail({"class": c, "shape": shape, "condition": k, "witnesses": rep.conditions[k].witnesses[:2]})
    return tr.result("additive.beta_conditions")


def check_beta_iso(G: FiniteGroup, ctx: PrecisionContext) -> CheckResult:
    tr = _Tracker(ctx.n_check)
    info = {}
    for shape in add.SHAPES:
        solved = add.phi_module_basis(G, shape, ctx.n_check)
        image = add.beta_image_basis(G, shape, ctx.n_check)
        info[shape] = {"solved_length": solved.length(), "image_length": image.length()}
        if not submodule_equal(solved, image):
            tr.fail({"shape": shape})
    return tr.result("additive.beta_iso", **info)


def _basis_tuples(G: FiniteGroup, shape: str, prec: int) -> list[add.PhiTuple]:
    B = add.phi_module_basis(G, shape, prec)
    return [add.PhiTuple.from_flat(G, shape, row, prec) for row in B.rows]


def check_projection(G: FiniteGroup, ctx: PrecisionContext) -> CheckResult:
    tr = _Tracker(ctx.n_check)
    for i, t in enumerate(_basis_tuples(G, "all", ctx.n_work)):
        tr.see(add.q_map(G, add.proj(t)).residual_checked(t, ctx.n_check), {"direction": "q.proj", "row": i})
    for i, t in enumerate(_basis_tuples(G, "cyclic", ctx.n_work)):
        qt = add.q_map(G, t)
        tr.see(add.proj(qt).residual_checked(t, ctx.n_check), {"direction": "proj.q", "row": i})
        rep = add.check_phi_conditions(G, qt, ctx.n_check)
        if not rep.passed:
            tr.fail({"direction": "q lands outside", "row": i, "conditions": rep.failed()})
    return tr.result("additive.projection")


def check_v_phi(G: FiniteGroup, ctx: PrecisionContext) -> CheckResult:
    tr = _Tracker(ctx.n_check)
    for c, a in enumerate(_class_vectors(G, ctx.n_work)):
        lhs = add.v_map(G, add.beta_cyclic(G, a))
        rhs = add.beta_cyclic(G, add.phi_power(G, a))
        tr.see(lhs.residual_checked(rhs, ctx.n_check), {"class": c})
    return tr.result("additive.v_phi")


def check_v_G(G: FiniteGroup, ctx: PrecisionContext, samples: int) -> CheckResult:
    tr = _Tracker(ctx.n_check)
    rng = random.Random(f"{ctx.seed}:phi:{G.order}")
    for i in range(samples):
        t = add.random_phi_member(G, "all", ctx.n_work, rng)
        composite = add.q_map(G, add.v_map(G, add.proj(t)))
        explicit = add.v_G_explicit(G, t)
        tr.see(composite.residual_checked(explicit, ctx.n_check), {"sample": i})
    return tr.result("additive.v_G", samples=samples)


# -- multiplicative checks ---------------------------------------------------------------


def _units(G: FiniteGroup, ctx: PrecisionContext, n: int) -> list[GroupRingElt]:
    return mul.sample_units(G, ctx, n)


def check_L(G: FiniteGroup, ctx: PrecisionContext, units: list[GroupRingElt]) -> list[CheckResult]:
    integ = _Tracker(ctx.n_check)
    addv = _Tracker(ctx.n_check)
    omega = _Tracker(ctx.n_check)
    Ls = []
    min_val = None
    for i, u in enumerate(units):
        try:
            L = mul.integral_log_L(G, u)
        except mul.IntegralityViolation as exc:
            integ.fail({"sample": i, "error": str(exc)})
            Ls.append(None)
            continue
        Ls.append(L)
        v = min(L.valuation(), ctx.n_check)
        min_val = v if min_val is None else min(min_val, v)
        if mul.omega_of(G, L) != (1, 0):
            omega.fail({"sample": i, "omega": list(mul.omega_of(G, L))})
    for i in range(0, len(units) - 1, 2):
        if Ls[i] is None or Ls[i + 1] is None:
            continue
        uv = units[i] * units[i + 1]
        addv.see(mul.integral_log_L(G, uv).residual_checked(Ls[i] + Ls[i + 1], ctx.n_check), {"pair": i // 2})
    teich = _Tracker(ctx.n_check)
    for r in range(1, G.p):
        c = GroupRingElt.monomial(group_basis(G), 0, G.p, ctx.n_work, mul.teichmueller(r, G.p, ctx.n_work).residue)
        L = mul.integral_log_L(G, c)
        if not L.is_zero():
            teich.fail({"residue": r, "valuation": min(L.valuation(), ctx.n_check)})
    res = integ.result("k1.L_integrality", samples=len(units), min_valuation=min_val)
    res.residual = None
    om = omega.result("k1.omega_L", samples=len(units))
    om.residual = None
    tc = teich.result("k1.L_teichmueller")
    tc.residual = None
    return [res, addv.result("k1.L_additive", pairs=len(units) // 2), tc, om]


def check_theta_family(
    G: FiniteGroup, ctx: PrecisionContext, units: list[GroupRingElt], tamper=None
) -> list[CheckResult]:
    ot = _Tracker(ctx.n_check)
    ki = _Tracker(ctx.n_check)
    psi = _Tracker(ctx.n_check)
    diag = _Tracker(ctx.n_check)
    idx = G.subgroup_index
    for i, u in enumerate(units):
        th = mul.theta_all(G, u)
        for H in G.subgroups:
            ot.see(mul.oliver_taylor_check(G, H, u, ctx.n_check), {"sample": i, "subgroup": idx[H]})
            ki.see(mul.key_identity_check(G, H, u, th, ctx.n_check), {"sample": i, "subgroup": idx[H]})
        if tamper is not None and i == 0:
            th = tamper(th)
        rep = mul.check_psi_conditions(G, th, ctx.n_check)
        for k in rep.failed():
            psi.fail({"sample": i, "condition": k, "witnesses": rep.conditions[k].witnesses[:2]})
        if rep.failed():
            continue  # script L is only defined on tuples satisfying M1-M4
        sl = mul.script_L(G, th)
        diag.see(sl.residual_checked(add.beta_all(G, mul.integral_log_L(G, u)), ctx.n_check), {"sample": i})
    psi_res = psi.result("k1.psi_conditions", samples=len(units))
    psi_res.residual = None
    return [
        ot.result("k1.oliver_taylor", samples=len(units)),
        ki.result("k1.key_identity", samples=len(units)),
        psi_res,
        diag.result("k1.script_L_diagram", samples=len(units)),
    ]


def check_kernel(G: FiniteGroup, ctx: PrecisionContext, units: list[GroupRingElt]) -> list[CheckResult]:
    tk = _Tracker(ctx.n_check)
    for r in range(1, G.p):
        t = mul.teichmueller_tuple(G, r, ctx.n_work)
        rep = mul.check_psi_conditions(G, t, ctx.n_check)
        if not rep.passed:
            tk.fail({"residue": r, "conditions": rep.failed()})
            continue
        sl = mul.script_L(G, t)
        for H, x in sl.entries.items():
            tk.see(_zero_residual(x, ctx.n_check), {"residue": r, "subgroup": G.subgroup_index[H]})
    inj = _Tracker(ctx.n_check)
    count = 0
    for i in range(0, len(units) - 1, 2):
        w = mul.commutator_unit(units[i], units[i + 1])
        th = mul.theta_all(G, w)
        trivial = all(x.agrees(GroupRingElt.one(x.basis, G.p, x.prec), ctx.n_check) for x in th.entries.values())
        if not trivial:
            continue
        count += 1
        inj.see(_zero_residual(mul.integral_log_L(G, w), ctx.n_check), {"pair": i // 2})
    return [tk.result("k1.kernel_teichmueller"), inj.result("k1.kernel_injectivity", trivial_theta_samples=count)]


# -- lattice ----------------------------------------------------------------------------------


def omega_kernel_rows(G: FiniteGroup) -> list[list[int]]:
    """Generators of ``ker(omega)`` in ``Z^Conj(G)`` (Schreier generators of the free abelian cover)."""
    n = len(G.classes)
    images = [mul.omega_of(G, add.class_vector(G, c, 1)) for c in range(n)]
    Q = G.abelianization.group

    def op(a, b):
        return (a[0] * b[0], Q.table[a[1]][b[1]])

    ident = (1, 0)
    word = {ident: [0] * n}
    queue = [ident]
    gens = []
    while queue:
        s = queue.pop(0)
        for i, w in enumerate(images):
            t = op(s, w)
            cand = word[s][:]
            cand[i] += 1
            if t not in word:
                word[t] = cand
                queue.append(t)
            else:
                diff = [a - b for a, b in zip(cand, word[t])]
                if any(diff):
                    gens.append(diff)
    return gens


def image_lattice_check(G: FiniteGroup, ctx: PrecisionContext, samples: int, units=None) -> CheckResult:
    """Span of sampled ``L(u)`` against ``ker(omega)`` modulo ``p^(n_check-2)``."""
    n = ctx.n_check - 2
    if units is None:
        units = mul.sample_units(G, ctx, samples, stream="lattice")
    rows = [mul.integral_log_L(G, u).integral_coeffs(n) for u in units]
    span = howell_form(rows, G.p, n, len(G.classes))
    kernel = howell_form(omega_kernel_rows(G), G.p, n, len(G.classes))
    contained = all(r in kernel for r in span.rows)
    saturated = contained and submodule_equal(span, kernel)
    tr = _Tracker(ctx.n_check)
    if not contained:
        tr.fail({"reason": "L(u) outside ker(omega)"})
    res = tr.result(
        "lattice.image_L",
        samples=len(units),
        modulus_exponent=n,
        contained=contained,
        saturated=saturated,
        span_length=span.length(),
        kernel_length=kernel.length(),
    )
    res.residual = None
    return res


# -- orchestration ----------------------------------------------------------------------------


def _timed(name: str, fn, *args):
    t0 = time.perf_counter()
    try:
        out = fn(*args)
    except PrecisionExhausted as exc:
        raise PrecisionExhausted(f"{name}: {exc}") from exc
    dt = time.perf_counter() - t0
    for r in out if isinstance(out, list) else [out]:
        r.seconds = dt
    return out if isinstance(out, list) else [out]


def run_suite(config: SuiteConfig) -> SuiteReport:
    G, ctx = config.group, config.ctx
    checks: list[CheckResult] = []
    if "additive" in config.families:
        checks += _timed("additive.tau_beta", check_tau_beta, G, ctx)
        checks += _timed("additive.beta_conditions", check_beta_conditions, G, ctx, config.tamper_phi)
        checks += _timed("additive.beta_iso", check_beta_iso, G, ctx)
        checks += _timed("additive.projection", check_projection, G, ctx)
        checks += _timed("additive.v_phi", check_v_phi, G, ctx)
        checks += _timed("additive.v_G", check_v_G, G, ctx, config.tuple_samples)
    if "k1" in config.families:
        units = _units(G, ctx, max(config.unit_samples, config.heavy_samples))
        checks += _timed("k1.L", check_L, G, ctx, units[: config.unit_samples])
        heavy = units[: config.heavy_samples]
        checks += _timed("k1.theta", check_theta_family, G, ctx, heavy, config.tamper_psi)
        checks += _timed("k1.kernel", check_kernel, G, ctx, heavy)
    if "lattice" in config.families:
        checks += _timed("lattice.image_L", image_lattice_check, G, ctx, config.lattice_samples)
    return SuiteReport(G.name, G.order, G.p, group_fingerprint(G), config.to_dict(), checks)


def run_checked(fn, *args):
    """Call ``fn`` and translate library errors into ``(exit_code, message)``."""
    try:
        return 0, fn(*args)
    except InputError as exc:
        return 2, str(exc)
    except PrecisionExhausted as exc:
        return 3, str(exc)
    except WhiteheadLabError as exc:
        return 1, f"{type(exc).__name__}: {exc}"
