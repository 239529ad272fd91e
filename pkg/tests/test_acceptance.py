"""Acceptance criteria, one reported line per criterion.

Each criterion runs its checks on all five signatures.  Hard records must
pass; informational records (printed constants that the computation does
not reproduce) are reported alongside with their measured values.
Criterion 1 is also asserted with its printed constant at rel tol 1e-5,
which fails by a signature-dependent power of 2.
"""
import pytest

from minrep import checks

from .conftest import ACCEPTANCE_LINES, run_check_cached

SIGS = checks.ACCEPTANCE_SIGNATURES

CRITERIA = {
    1: ("Bessel K-type synthesis equals the generating function (derived constant)", ["ktype.bessel_synthesis"]),
    2: ("Plancherel chain for ( , )_N", ["plancherel.N_chain", "plancherel.N_positive"]),
    3: ("Cauchy-data form, axis independence, 4 pi W = N",
        ["cauchy.W_norm", "cauchy.axis_independence", "cauchy.W_imaginary", "cauchy.W_vs_N"]),
    4: ("ultrahyperbolic residual order >= 1.9", ["box.synthesized", "box.f0"]),
    5: ("special-function identities",
        ["specfun.flat_point_reduction", "specfun.f4_reduction", "specfun.quadratic_transform", "specfun.bailey"]),
    6: ("Lie algebra brackets, Fourier duality, eps independence",
        ["lie.commutators", "lie.fourier_duality", "lie.eps_independence"]),
    7: ("unitarity of the parabolic action",
        ["unitarity.dilation", "unitarity.levi_rotation", "unitarity.levi_boost", "unitarity.sign",
         "unitarity.translation"]),
    8: ("Yamabe covariance, metric conformality, Yamabe F0 = 0",
        ["conformal.yamabe_order", "geometry.metric_psi", "geometry.metric_action", "conformal.yamabe_F0"]),
    9: ("cross-picture ratios are vector independent",
        ["compact.ktype_constancy_M", "compact.ktype_constancy_A"]),
    10: ("conserved quantities", ["conserved.translation", "conserved.energy"]),
}

INFORMATIONAL = {
    1: ["ktype.printed_constant", "ktype.euclidean_radius"],
    9: ["compact.kappa_vs_printed", "compact.N_over_M_vs_printed", "compact.cone_over_M_vs_printed", "compact.printed_weight_constancy",
        "compact.N_over_A_vs_c3"],
}


def _records(criterion):
    fns = checks.CRITERION_CHECKS[criterion]
    fns = fns if isinstance(fns, tuple) else (fns,)
    out = []
    for p, q in SIGS:
        for fn in fns:
            out.extend(run_check_cached(fn, p, q))
    return out


def _fmt(r):
    return f"{r.signature} {r.check_id} residual={r.residual:.3e} ({r.comparison} {r.tolerance:g})"


@pytest.mark.parametrize("criterion", sorted(CRITERIA))
def test_criterion(criterion):
    title, ids = CRITERIA[criterion]
    recs = _records(criterion)
    crashes = [r for r in recs if r.check_id.startswith("crash.")]
    hard = [r for r in recs if r.check_id in ids]
    failed = [r for r in hard + crashes if not r.passed]
    worst = {}
    for r in hard:
        if r.comparison == ">=":
            worst[r.check_id] = min(worst.get(r.check_id, float("inf")), r.residual)
        else:
            worst[r.check_id] = max(worst.get(r.check_id, 0.0), r.residual)
    status = "PASS" if not failed else "FAIL"
    detail = ", ".join(f"{k}={v:.2e}" for k, v in worst.items())
    ACCEPTANCE_LINES.append(f"{status} criterion {criterion}: {title} [{detail}]")
    for r in failed:
        ACCEPTANCE_LINES.append(f"     failing: {_fmt(r)} {r.computed if r in crashes else ''}")
    for cid in INFORMATIONAL.get(criterion, []):
        for r in recs:
            if r.check_id == cid:
                tag = "match" if r.passed else "mismatch"
                ACCEPTANCE_LINES.append(f"     info ({tag}): {_fmt(r)}")
    assert not failed, "\n".join(_fmt(r) for r in failed)
    # energy only exists for q = 2 or p = 2
    if criterion == 10:
        assert {r.signature for r in hard if r.check_id == "conserved.energy"} == {"(4,2)", "(2,4)"}


def test_criterion_1_printed_constant():
    """The criterion as stated, with the printed constant; the synthesis gives a different power of 2."""
    recs = [r for r in _records(1) if r.check_id == "ktype.printed_constant"]
    ok = all(r.passed for r in recs)
    worst = max(r.residual for r in recs)
    ACCEPTANCE_LINES.append(
        f"{'PASS' if ok else 'FAIL'} criterion 1 (printed constant, rel tol 1e-5): max rel deviation {worst:.3e}; "
        + "; ".join(f"{r.signature} measured/printed="
                    f"{r.computed['measured_over_reference']:.6g}" for r in recs))
    assert ok


def test_criterion_9_measured_constants():
    """Record the measured constants; the printed ones are informational."""
    recs = {(r.signature, r.check_id): r for r in _records(9)}
    for p, q in SIGS:
        s = f"({p},{q})"
        nm = recs[(s, "compact.N_over_M_vs_printed")].computed
        assert nm["measured"] == pytest.approx(2.0, rel=1e-6)
        na = recs[(s, "compact.N_over_A_vs_c3")].computed
        assert na["measured"] == pytest.approx(na["c3"], rel=1e-6)
