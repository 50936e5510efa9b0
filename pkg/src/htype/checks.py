"""Invariant suites run by ``htype verify``.

Each suite function takes a Space, a numpy Generator and a tolerance mapping
and returns a list of :class:`Check`.  Tolerance keys are listed in
``DEFAULT_TOLERANCES``; the CLI exposes each as ``--tol-<key>``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import catalog, geometry, group, radial
from .algebra import bracket, j_map, verify_clifford
from .group import GroupElement, Space

DEFAULT_TOLERANCES = {
    "clifford": 1e-12,
    "group": 1e-12,
    "jacobi": 1e-12,
    "haar": 1e-8,
    "haar-spread": 1e-10,
    "cayley": 1e-10,
    "differential": 1e-6,
    "metric": 1e-8,
    "density-forms": 1e-10,
    "density": 1e-5,
    "density-spread": 1e-6,
    "geodesic": 1e-6,
    "distance": 1e-5,
    "harmonic": 1e-4,
    "connection": 1e-12,
    "curvature": 1e-10,
    "second-fundamental-form": 1e-12,
    "heat-mass": 1e-4,
    "heat-positivity": 1e-10,
}


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    relation: str = "<="
    seconds: float = 0.0  # wall time of the producing suite
    detail: str = ""

    def as_dict(self, timing: bool = False) -> dict:
        out = {
            "name": self.name,
            "value": self.value,
            "tol": self.tol,
            "relation": self.relation,
            "passed": self.passed,
        }
        if self.detail:
            out["detail"] = self.detail
        if timing:
            out["suite_seconds"] = round(self.seconds, 4)
        return out


def at_most(name, value, tol, detail="") -> Check:
    value = float(value)
    return Check(name, value, float(tol), bool(value <= tol), "<=", detail=detail)


def at_least(name, value, tol, detail="") -> Check:
    value = float(value)
    return Check(name, value, float(tol), bool(value >= tol), ">=", detail=detail)


def random_elements(space: Space, rng: np.random.Generator, count: int) -> np.ndarray:
    """Stacked group coordinates with a log-uniform in [0.1, 10]."""
    X = rng.normal(size=(count, space.m))
    Z = rng.normal(size=(count, space.k))
    a = np.exp(rng.uniform(np.log(0.1), np.log(10.0), size=count))
    return space.join(X, Z, a)


def random_ball_points(space: Space, rng: np.random.Generator, count: int, max_radius=0.95) -> np.ndarray:
    W = rng.normal(size=(count, space.dim))
    W /= np.linalg.norm(W, axis=1)[:, None]
    r = max_radius * rng.uniform(size=count) ** (1.0 / space.dim)
    return W * r[:, None]


def unit_vectors(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    W = rng.normal(size=(count, n))
    return W / np.linalg.norm(W, axis=1)[:, None]


# --------------------------------------------------------------------------
# suites
# --------------------------------------------------------------------------


def algebra_suite(space: Space, rng, tol) -> list:
    alg = space.algebra
    rep = verify_clifford(alg.module, tol["clifford"])
    Zs = rng.normal(size=(100, alg.k))
    j_dev = max(
        np.abs(alg.j_matrix(Z) @ alg.j_matrix(Z) + (Z @ Z) * np.eye(alg.m)).max() for Z in Zs
    )
    X = rng.normal(size=(100, alg.m))
    Y = rng.normal(size=(100, alg.m))
    duality = np.abs(
        np.einsum("ni,ni->n", bracket(alg, X, Y), Zs) - np.einsum("ni,ni->n", j_map(alg, Zs, X), Y)
    ).max()
    return [
        at_most("clifford_relations", rep.max_deviation, tol["clifford"]),
        at_most("j_square_identity", j_dev, tol["clifford"]),
        at_most("bracket_duality", duality, tol["clifford"]),
    ]


def group_suite(space: Space, rng, tol, count: int = 1000) -> list:
    s1, s2, s3 = (random_elements(space, rng, count) for _ in range(3))
    mul = lambda a, b: group.multiply_coords(space, a, b)  # noqa: E731
    assoc = np.abs(mul(mul(s1, s2), s3) - mul(s1, mul(s2, s3))).max()
    e = np.broadcast_to(group.identity(space).coords, s1.shape)
    ident = max(np.abs(mul(s1, e) - s1).max(), np.abs(mul(e, s1) - s1).max())
    inv = group.inverse_coords(space, s1)
    inverse = max(np.abs(mul(s1, inv) - e).max(), np.abs(mul(inv, s1) - e).max())

    def elem(v):
        return group.AlgebraElement.from_coords(space, v)

    jacobi = 0.0
    for u, v, w in zip(*(rng.normal(size=(3, 50, space.dim)))):
        u, v, w = elem(u), elem(v), elem(w)
        br = lambda a, b: group.lie_bracket_s(space, a, b)  # noqa: E731
        total = br(u, br(v, w)).coords + br(v, br(w, u)).coords + br(w, br(u, v)).coords
        jacobi = max(jacobi, np.abs(total).max())
    return [
        at_most("group_associativity", assoc, tol["group"]),
        at_most("group_identity", ident, tol["group"]),
        at_most("group_inverse", inverse, tol["group"]),
        at_most("jacobi_identity", jacobi, tol["jacobi"]),
    ]


def haar_suite(space: Space, rng, tol, count: int = 20) -> list:
    Q1 = float(space.Q) + 1.0
    worst_rel, worst_spread, worst_closed = 0.0, 0.0, 0.0
    for g in random_elements(space, rng, 5):
        g = GroupElement.from_coords(space, g)
        expected = g.a**Q1
        vals = np.array([
            group.numeric_left_translation_jacobian(space, g, GroupElement.from_coords(space, s), rel_step=1e-3)
            for s in random_elements(space, rng, count)
        ])
        worst_rel = max(worst_rel, np.abs(vals / expected - 1.0).max())
        worst_spread = max(worst_spread, (vals.max() - vals.min()) / expected)
        worst_closed = max(worst_closed, abs(group.left_translation_jacobian(space, g) / expected - 1.0))
    return [
        at_most("haar_jacobian_closed_form", worst_closed, tol["haar"]),
        at_most("haar_jacobian_numeric", worst_rel, tol["haar"]),
        at_most("haar_jacobian_spread", worst_spread, tol["haar-spread"], "relative to a_g^(Q+1)"),
    ]


def chart_differential_at_identity(space: Space, rel_step: float = 1e-5) -> np.ndarray:
    e = group.identity(space).coords
    h = rel_step * np.maximum(1.0, np.abs(e))
    cols = []
    for i in range(space.dim):
        step = np.zeros(space.dim)
        step[i] = h[i]
        cols.append(
            (group.group_to_ball_coords(space, e + step) - group.group_to_ball_coords(space, e - step))
            / (2 * h[i])
        )
    return np.array(cols).T


def model_suite(space: Space, rng, tol, count: int = 10_000) -> list:
    b = random_ball_points(space, rng, count, max_radius=0.99)
    d = group.cayley_coords(space, b)
    Xd, _, td = space.split(d)
    margin = (td - 0.25 * np.einsum("ni,ni->n", Xd, Xd)).min()
    back = group.cayley_inv_checked(space, d)
    rt_ball = np.abs(back - b).max()
    s = random_elements(space, rng, count)
    sd = group.to_siegel_coords(space, s)
    rt_siegel = np.abs(group.cayley_coords(space, group.cayley_inv_checked(space, sd)) - sd).max()
    rt_group = np.abs(group.ball_to_group_coords(space, group.group_to_ball_coords(space, s)) - s).max()
    D = chart_differential_at_identity(space)
    g0 = geometry.metric_at_ball(space, np.zeros(space.dim))
    return [
        at_least("cayley_image_margin", margin, 0.0),
        at_most("cayley_roundtrip_ball", rt_ball, tol["cayley"]),
        at_most("cayley_roundtrip_siegel", rt_siegel, tol["cayley"]),
        at_most("group_ball_roundtrip", rt_group, tol["cayley"]),
        at_most("chart_differential_half_identity", np.abs(D - 0.5 * np.eye(space.dim)).max(), tol["differential"]),
        at_most("metric_at_origin_4I", np.abs(g0 - 4 * np.eye(space.dim)).max(), tol["metric"]),
    ]


def density_suite(space: Space, rng, tol, rhos=(0.3, 1.0, 2.0), n_directions: int = 20) -> list:
    grid = np.linspace(0.01, 8.0, 400)
    forms = np.abs(radial.density_omega_r(space, grid) / radial.density_omega(space, grid) - 1.0).max()
    worst, spread = 0.0, 0.0
    for rho in rhos:
        vals = np.array([
            radial.volume_density_numeric(space, rho, w) for w in unit_vectors(rng, n_directions, space.dim)
        ])
        ref = radial.density_omega(space, rho)
        worst = max(worst, np.abs(vals / ref - 1.0).max())
        spread = max(spread, (vals.max() - vals.min()) / ref)
    return [
        at_most("density_closed_forms_agree", forms, tol["density-forms"]),
        at_most("density_numeric_vs_closed", worst, tol["density"]),
        at_most("density_direction_spread", spread, tol["density-spread"]),
    ]


def geodesic_suite(space: Space, rng, tol, n_directions: int = 20, length: float = 2.0, step: float = 1e-3) -> list:
    paths = geometry.geodesic_fan(space, unit_vectors(rng, n_directions, space.dim), length, step)
    end_r = np.array([np.linalg.norm(p.end) for p in paths])
    return [
        at_most("geodesic_transverse_deviation", max(p.transverse_deviation() for p in paths), tol["geodesic"]),
        at_most("geodesic_distance_formula", max(p.distance_error() for p in paths), tol["distance"]),
        at_most("geodesic_unit_speed", max(p.speed_error for p in paths), tol["geodesic"]),
        at_most("geodesic_end_radius", np.abs(end_r - np.tanh(0.5 * length)).max(), tol["distance"]),
        at_most("geodesic_truncated", float(sum(p.truncated for p in paths)), 0.0),
    ]


def harmonicity_suite(space: Space, rng, tol, rhos=(0.5, 1.0, 2.0), n_directions: int = 8) -> list:
    f = lambda rho: np.exp(-(rho**2))  # noqa: E731
    seed = int(rng.integers(2**31))
    spread, deviation = 0.0, 0.0
    for rho in rhos:
        rep = radial.harmonicity_check(space, f, rho, n_directions, seed=seed, tol=tol["harmonic"])
        spread = max(spread, rep.spread / rep.scale)
        deviation = max(deviation, rep.deviation / rep.scale)
    return [
        at_most("harmonic_direction_spread", spread, tol["harmonic"], "relative to 1+|value|"),
        at_most("harmonic_matches_radial_operator", deviation, tol["harmonic"], "relative to 1+|value|"),
    ]


def curvature_suite(space: Space, rng, tol, n_subgroups: int = 10) -> list:
    cd = geometry.curvature(space)
    fr = geometry.frame(space)
    L = np.einsum("ijp,pl->ijl", cd.gamma, cd.gram)
    compat = np.abs(L + L.transpose(0, 2, 1)).max()
    torsion = np.abs(cd.gamma - cd.gamma.transpose(1, 0, 2) - fr.c).max()
    e = np.eye(space.dim)
    K_vt = geometry.sectional_curvature(space, e[0], e[-1])
    K_zt = geometry.sectional_curvature(space, e[space.m], e[-1])
    ratio = geometry.symmetry_ratio(space)
    checks = [
        at_most("connection_metric_compatible", compat, tol["connection"]),
        at_most("connection_torsion_free", torsion, tol["connection"]),
        at_most("curvature_symmetries", cd.symmetry_residual(), tol["curvature"]),
        at_most("curvature_first_bianchi", cd.bianchi_residual(), tol["curvature"]),
        at_most("sectional_v_T_minus_quarter", abs(K_vt + 0.25), tol["curvature"]),
        at_most("sectional_z_T_minus_one", abs(K_zt + 1.0), tol["curvature"]),
    ]
    if space.spec is not None:
        expected = catalog.expected_symmetric(space.spec)
        if expected:
            checks.append(at_most("symmetry_ratio_expected_symmetric", ratio, geometry.SYMMETRIC_REL_TOL))
        else:
            checks.append(at_least("symmetry_ratio_expected_nonsymmetric", ratio, geometry.NONSYMMETRIC_SEPARATION))
    sff, sec, dr = 0.0, 0.0, 0.0
    for _ in range(n_subgroups):
        X0 = unit_vectors(rng, 1, space.m)[0]
        Z0 = unit_vectors(rng, 1, space.k)[0]
        rep = geometry.totally_geodesic_check(space, X0, Z0)
        sff = max(sff, rep.second_fundamental_form, rep.closure)
        sec = max(sec, rep.sectional_deviation)
        dr = max(dr, rep.nabla_R_restricted)
    checks += [
        at_most("subgroup_second_fundamental_form", sff, tol["second-fundamental-form"]),
        at_most("subgroup_sectional_vs_complex_hyperbolic", sec, tol["curvature"]),
        at_most("subgroup_nabla_R", dr, tol["curvature"]),
    ]
    return checks


def heat_suite(space: Space, rng, tol, **params) -> list:
    sol = radial.heat_solve(space, mass_tol=tol["heat-mass"], **params)
    monotone = float(np.diff(sol.second_moment).min())
    return [
        at_most("heat_mass_drift", sol.mass_drift, tol["heat-mass"]),
        at_least("heat_min_value", sol.min_value, -tol["heat-positivity"]),
        Check("heat_second_moment_increasing", monotone, 0.0, sol.spreading, ">"),
    ]


SUITES = {
    "algebra": algebra_suite,
    "group": group_suite,
    "haar": haar_suite,
    "models": model_suite,
    "density": density_suite,
    "geodesic": geodesic_suite,
    "harmonic": harmonicity_suite,
    "curvature": curvature_suite,
    "heat": heat_suite,
}


def run_suites(space: Space, seed: int = 0, tol: dict | None = None, only=None, options=None) -> list:
    """Run the named suites (all by default).

    Each check records the wall time of the suite that produced it.
    """
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(tol or {})
    options = options or {}
    rng = np.random.default_rng(seed)
    checks = []
    for name, suite in SUITES.items():
        if only and name not in only:
            continue
        start = time.perf_counter()
        results = suite(space, rng, tolerances, **options.get(name, {}))
        elapsed = time.perf_counter() - start
        for c in results:
            c.seconds = elapsed
        checks.extend(results)
    return checks
