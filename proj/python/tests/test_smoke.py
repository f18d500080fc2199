import math

import numpy as np
import pytest

import thinfilm as tf

M = 2.0 / 45.0


def test_equilibrium_closed_forms():
    s = tf.SmythHill(M)
    assert s.support_radius == pytest.approx(1.0, abs=1e-14)
    assert s.alpha() == pytest.approx(1.0 / 315.0, abs=1e-15)
    assert s.fourth_moment() == pytest.approx(2.0 / 945.0, abs=1e-15)
    q = s.quantiles(2000)
    assert tf.alpha(q) == pytest.approx(1.0 / 315.0, abs=1e-6)
    assert tf.entropy(q) == pytest.approx(1.0 / 63.0, abs=1e-6)
    d, extra = tf.dissipation(q)
    assert abs(d) < 1e-6
    assert extra == pytest.approx(1.0 / 945.0, rel=0.02)


def test_w2_translate_and_bruteforce():
    q = tf.SmythHill(M).quantiles(400)
    assert tf.w2(q, q.translated(0.3)) == pytest.approx(0.3 * math.sqrt(M), rel=1e-12)
    a = [(0.0, 0.5), (1.0, 0.5)]
    b = [(2.0, 0.25), (-1.0, 0.75)]
    assert tf.w2_sq_atoms(a, b) == pytest.approx(tf.w2_bruteforce(a, b), rel=1e-9)


def test_run_decays():
    s = tf.SmythHill(M)
    cfg = tf.JkoConfig()
    cfg.n_cells = 100
    snaps = tf.run(s.quantiles(100).translated(0.5), 0.2, cfg)
    assert len(snaps) == 201
    h = [snap["record"]["H_rel"] for snap in snaps]
    assert all(b <= a for a, b in zip(h, h[1:]))
    assert h[-1] < math.exp(-2 * 0.2 * 0.9) * h[0]
    assert snaps[-1]["positions"].shape == (100,)


def test_grid_density_and_static_suite():
    s = tf.SmythHill(M)
    g = s.sample(-1.5, 1e-3, 3001)
    assert isinstance(g.values, np.ndarray)
    reps = tf.static_suite(g)
    names = {r["name"] for r in reps}
    assert {"h1", "pkl", "talagrand"} <= names
    with pytest.raises(ValueError):
        tf.GridDensity(0.0, 1e-3, np.array([1.0, -1.0] * 8))


def test_fit_rate():
    t = np.linspace(0, 2, 50)
    fit = tf.fit_rate(t, 3 * np.exp(-1.5 * t), 0.0, 2.0)
    assert fit["rate"] == pytest.approx(1.5, abs=1e-10)
    with pytest.raises(ValueError):
        tf.fit_rate(t[:5], np.exp(-t[:5]), 0.0, 2.0)


def test_initial_condition_and_fdm():
    q = tf.parse_initial_condition("smyth-translated:0.2", M, 128)
    assert q.mass == pytest.approx(M)
    g = tf.GridDensity(-1.0, 0.1, np.full(21, 0.3))
    out = tf.fdm_integrate(g, 0.01, True)
    assert np.allclose(out.values, 0.3 * math.exp(0.01), rtol=1e-4)
