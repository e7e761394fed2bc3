import json
from fractions import Fraction as Fr

import numpy as np
import pytest

from qcutstack.config import validate
from qcutstack.cutstack import IntervalQ
from qcutstack.measures import MeasureTarget, target_from_dict
from qcutstack.qlimits import (
    cantor_columns,
    density_report,
    measure_distance,
    orbit_measure,
    run_qlimit_experiment,
    run_single,
    wasserstein1,
)
from qcutstack.qmap import orbit_decompose

LEB = MeasureTarget.lebesgue()


def test_orbit_measure_examples():
    N = 10
    m = orbit_measure(range(N), N)
    assert m.total_mass() == 1
    assert m.atoms == [(Fr(q, N), Fr(1, N)) for q in range(N)]
    fixed = orbit_measure([3], N)
    assert fixed.atoms == [(Fr(3, 10), 1)]


def test_partition_identity():
    N = 30
    dec = orbit_decompose((np.arange(N) * 7 + 2) % N)
    total = {}
    for i, o in enumerate(dec.orbits):
        m = orbit_measure(o, N, i)
        for x, w in m.atoms:
            total[x] = total.get(x, 0) + w * Fr(m.K, N)
    assert total == {Fr(q, N): Fr(1, N) for q in range(N)}


@pytest.mark.parametrize("N", [4, 17, 128])
def test_uniform_vs_lebesgue(N):
    d = measure_distance(orbit_measure(range(N), N), LEB)
    assert d <= 1 / N + 1e-15
    assert d == pytest.approx(1 / N)


def test_point_mass_at_zero():
    assert measure_distance(orbit_measure([0], 8), LEB) == pytest.approx(1.0)


def test_distance_decreases_for_discretized_target():
    comp = MeasureTarget.component(IntervalQ(0, Fr(1, 2)))
    ds = []
    for N in [16, 64, 256, 1024]:
        m = orbit_measure(range(N // 2), N)
        ds.append(measure_distance(m, comp))
    assert all(b < a for a, b in zip(ds, ds[1:]))


def test_wasserstein_small_for_uniform():
    assert wasserstein1(orbit_measure(range(64), 64), LEB) == pytest.approx(1 / 128, rel=1e-3)


def test_mixture_target():
    t = target_from_dict({"kind": "mixture", "weights": ["1/4", "3/4"],
                          "targets": [{"kind": "component", "interval": ["0/1", "1/2"]}, {"kind": "atomic", "atoms": [["3/4", 1]]}]})
    assert t.cdf(0.5) == pytest.approx(0.25)
    assert t.cdf(0.75) == pytest.approx(1.0)
    assert t.cdf_left(0.75) == pytest.approx(0.25)


def test_density_trivial_selections():
    Ns = [64, 128, 256, 512]
    full = density_report({N: [N] for N in Ns})
    assert full.alpha == pytest.approx(1) and full.beta == pytest.approx(1)
    point = density_report({N: [1] for N in Ns})
    assert point.alpha == pytest.approx(0, abs=1e-12) and point.beta == pytest.approx(0, abs=1e-12)
    assert point.beta_seq == tuple(1 / N for N in Ns)
    with pytest.raises(ValueError):
        density_report({64: [1], 128: [1]})


def test_beta_at_least_alpha():
    rep = density_report({64: [10, 5], 128: [30, 2, 2], 256: [60, 40]})
    assert all(b >= a for a, b in zip(rep.alpha_seq, rep.beta_seq))


def test_cantor_columns_measure():
    for depth in range(5):
        K = 4**6
        assert len(cantor_columns(K, depth)) == K // 2**depth


def _cfg(**over):
    raw = {"map": {"kind": "rotation", "alpha": "610/987"}, "N": [128, 256, 512]}
    raw.update(over)
    return validate(raw)


def test_constant_observable_sanity_column():
    rec = run_single(_cfg(observables=[{"name": "one", "kind": "constant"}]), 256)
    assert rec["orbit_means"]["one"] == [1.0] * rec["n_orbits"]
    assert rec["qe_variance"]["one"] == 0


def test_measure_only_pipeline():
    rep = run_qlimit_experiment(_cfg())
    assert all("qe_variance" not in r for r in rep["sweep"])
    assert "qe_variance" not in rep["fits"]


def test_summary_schema_and_thread_determinism():
    cfg = _cfg(observables=[{"name": "c", "kind": "cos", "k": 1}])
    a = run_qlimit_experiment(cfg, threads=1)
    b = run_qlimit_experiment(cfg, threads=3)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert set(a) >= {"config_hash", "sweep", "fits"}
    r = a["sweep"][0]
    assert {"N", "delta_N", "qe_variance", "orbits"} <= set(r)
    assert {"K", "distance_lebesgue", "distance_target"} <= set(r["orbits"][0])


def test_orbit_expectation_equals_measure_integral():
    from qcutstack.qmap import full_spectrum, UnitaryMap
    from qcutstack.skew import cos_q
    from qcutstack.weyl import spectrum_expectations
    N = 90
    spec = full_spectrum(UnitaryMap.from_perm((np.arange(N) * 11 + 4) % N))
    a = cos_q(2)
    vals = spectrum_expectations(a, spec)
    c = 0
    for b in spec.bases:
        integral = np.mean(a.eval_q(b.points / N))
        assert np.allclose(vals[c:c + b.K], integral, atol=1e-12)
        c += b.K


def test_narrow_selection_density_bound():
    cfg = validate({"map": {"kind": "full_shift", "stages": 10}, "stage": 3, "N": [256, 1024, 4096],
                    "policy": {"kind": "periodic"}, "selection": {"kind": "cantor"}})
    rep = run_qlimit_experiment(cfg)
    for r in rep["sweep"]:
        assert r["selection"]["beta"] <= r["selection"]["selected_width"] + 0.05


def test_degeneracy_counts_identity():
    cfg = validate({"map": {"kind": "iet", "permutation": [1], "lengths": ["1/1"]}, "N": [8],
                    "policy": {"kind": "periodic"}})
    # phases -Q^2 mod 8 take the values 0, 7, 4 with multiplicities 2, 4, 2
    assert run_single(cfg, 8)["degeneracy"] == {"distinct_phases": 3, "pairs_in_degenerate_spaces": 8,
                                                 "max_multiplicity": 4}
