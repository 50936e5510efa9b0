"""Acceptance criteria, one test each.

Every test prints a PASS/FAIL line (also collected into the terminal summary)
with the measured value, its threshold and the wall time against the budget.
Wall time counts toward the verdict.
"""
import time
from contextlib import contextmanager

import numpy as np

from conftest import ACCEPTANCE_LINES
from htype import catalog, checks, geometry, radial
from htype.algebra import CliffordSpec
from htype.checks import DEFAULT_TOLERANCES as TOL
from htype.group import Space, make_space

SEED = 20240601


@contextmanager
def criterion(number, title, budget):
    """Collect named (ok, detail) results and report them with the elapsed time."""
    results = []
    start = time.perf_counter()
    try:
        yield results
    except Exception as exc:  # report, then re-raise below
        results.append((False, f"raised {type(exc).__name__}: {exc}"))
        raised = exc
    else:
        raised = None
    elapsed = time.perf_counter() - start
    timely = elapsed < budget
    ok = all(r[0] for r in results) and timely and bool(results)
    failed = [detail for good, detail in results if not good]
    parts = "; ".join(detail for _, detail in results)
    line = f"{'PASS' if ok else 'FAIL'} [{number:>2}] {title}: {parts} | {elapsed:.2f}s < {budget:g}s"
    print(line)
    ACCEPTANCE_LINES.append(line)
    if raised is not None:
        raise raised
    assert timely, f"runtime {elapsed:.2f}s exceeds {budget}s"
    assert not failed, failed


def record(results, name, value, limit, relation="<="):
    ok = {"<=": value <= limit, ">=": value >= limit, ">": value > limit}[relation]
    results.append((bool(ok), f"{name}={value:.3g} {relation} {limit:g}"))


def from_checks(results, check_list):
    for c in check_list:
        results.append((c.passed, f"{c.name}={c.value:.3g} {c.relation} {c.tol:g}"))


S7 = make_space(2, 1)


def test_criterion_01_h_type_axioms():
    with criterion(1, "H-type axioms, k = 1..8", 1.0) as res:
        rng = np.random.default_rng(SEED)
        worst = 0.0
        for k in range(1, 9):
            alg = make_space(k, 1).algebra
            Z = rng.normal(size=(100, k))
            J = np.tensordot(Z, alg.E, axes=1)
            Z2 = np.einsum("ni,ni->n", Z, Z)
            worst = max(worst, np.abs(J @ J + Z2[:, None, None] * np.eye(alg.m)).max())
        record(res, "max ||J_Z^2 + |Z|^2 I||", worst, 1e-12)


def test_criterion_02_group_laws():
    with criterion(2, "group laws, dim 7", 1.0) as res:
        from_checks(res, checks.group_suite(S7, np.random.default_rng(SEED), TOL, count=1000))


def test_criterion_03_haar():
    with criterion(3, "Haar Jacobian a_g^(Q+1)", 1.0) as res:
        from_checks(res, checks.haar_suite(S7, np.random.default_rng(SEED), TOL))


def test_criterion_04_models():
    with criterion(4, "Cayley round trips and chart differential", 5.0) as res:
        from_checks(res, checks.model_suite(S7, np.random.default_rng(SEED), TOL, count=10_000))


def test_criterion_05_density():
    with criterion(5, "volume density, dim 7", 60.0) as res:
        from_checks(res, checks.density_suite(S7, np.random.default_rng(SEED), TOL, rhos=(0.3, 1.0, 2.0), n_directions=20))


def test_criterion_06_geodesics():
    with criterion(6, "geodesics are diameters, 20 directions, length 2", 60.0) as res:
        from_checks(res, checks.geodesic_suite(S7, np.random.default_rng(SEED), TOL, n_directions=20, length=2.0))


def test_criterion_07_harmonicity():
    with criterion(7, "harmonicity with negative control", 120.0) as res:
        f = lambda rho: np.exp(-(rho**2))  # noqa: E731
        for rho in (0.5, 1.0, 2.0):
            rep = radial.harmonicity_check(S7, f, rho, n_directions=8, seed=SEED, tol=1e-4)
            record(res, f"spread(rho={rho})/(1+|Lf|)", rep.spread / rep.scale, 1e-4)
            record(res, f"deviation(rho={rho})/(1+|Lf|)", rep.deviation / rep.scale, 1e-4)
        gram = np.eye(7)
        gram[4:6, 4:6] *= 4.0  # z scaled by 2, brackets untouched
        control = radial.harmonicity_check(Space(S7.algebra, gram), f, 1.0, n_directions=8, seed=SEED, tol=1e-4)
        res.append((not control.passed, f"control spread={control.spread / control.scale:.3g} > 1e-4 (must fail)"))


def test_criterion_08_symmetry_dichotomy():
    with criterion(8, "symmetry dichotomy", 30.0) as res:
        symmetric = [(1, 1), (1, 2), (1, 3), (3, (1, 0)), (7, (1, 0))]
        for k, mult in symmetric:
            space = make_space(k, mult)
            record(res, f"ratio(k={k},m={space.m})", geometry.symmetry_ratio(space), 1e-8)
        for k in range(2, 9):
            spec = CliffordSpec(k, (catalog.first_nonsymmetric_multiple(k) - 1, 1) if k in (3, 7) else 1)
            space = make_space(spec.k, spec.mult)
            assert space.dim == catalog.nonsymmetric_dims(k, 0)[0]
            record(res, f"ratio(dim {space.dim})", geometry.symmetry_ratio(space), 1e-3, ">=")


def test_criterion_09_totally_geodesic():
    with criterion(9, "totally geodesic complex hyperbolic planes", 5.0) as res:
        rng = np.random.default_rng(SEED)
        sff, closure, sec = 0.0, 0.0, 0.0
        for _ in range(10):
            X0 = rng.normal(size=S7.m)
            Z0 = rng.normal(size=S7.k)
            rep = geometry.totally_geodesic_check(S7, X0 / np.linalg.norm(X0), Z0 / np.linalg.norm(Z0))
            sff = max(sff, rep.second_fundamental_form)
            closure = max(closure, rep.closure)
            sec = max(sec, rep.sectional_deviation)
        record(res, "second fundamental form", sff, 1e-12)
        record(res, "closure", closure, 1e-12)
        record(res, "sectional vs complex hyperbolic", sec, 1e-10)
        e = np.eye(7)
        record(res, "|K(X,T)+1/4|", abs(geometry.sectional_curvature(S7, e[0], e[6]) + 0.25), 1e-10)
        record(res, "|K(Z,T)+1|", abs(geometry.sectional_curvature(S7, e[4], e[6]) + 1.0), 1e-10)


def test_criterion_10_table():
    with criterion(10, "dimension table", 0.1) as res:
        descriptors = {1: "—", 2: "7+4n", 3: "12+4n", 4: "13+8n", 5: "14+8n", 6: "15+8n", 7: "24+8n", 8: "25+16n"}
        bad = 0
        for k, text in descriptors.items():
            row = catalog.table_row(k)
            bad += row.descriptor != text
            if k == 1:
                bad += row.values(5) != []
            else:
                base, stride = (int(x) for x in text.rstrip("n").split("+"))
                bad += row.values(5) != [base + stride * n for n in range(6)]
        record(res, "mismatched rows", float(bad), 0.0)


def test_criterion_11_heat():
    with criterion(11, "radial heat flow, dim 7", 30.0) as res:
        sol = radial.heat_solve(S7, t_end=1.0)
        record(res, "mass drift", sol.mass_drift, 1e-4)
        record(res, "min u", sol.min_value, -1e-10, ">=")
        record(res, "min increment of second moment", float(np.diff(sol.second_moment).min()), 0.0, ">")
