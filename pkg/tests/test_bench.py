import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy.optimize import brentq

from lpvkit.bench import (
    ExperimentConfig,
    UnbalancedDiscParams,
    add_noise_snr,
    as_schedule,
    bench_template,
    embed_lpv,
    gen_multisine,
    run_experiment,
    scheduling_of,
    simulate_disc,
)
from lpvkit.bench.svg import bar_chart, line_chart
from lpvkit.ident import Dataset, bfr, lpvarx, lpvidpoly, simulate_model
from lpvkit.models import frozen_poles, simulate_io
from lpvkit.pvmatrix import pmatrix
from lpvkit.scheduling import make_timemap

from disc_oracles import REF_POLE_MAG_P1, embedding_coefficients, frozen_pole_oracle

D = UnbalancedDiscParams()


def test_params_validation():
    with pytest.raises(ValueError):
        UnbalancedDiscParams(J=0.0)
    with pytest.raises(ValueError):
        UnbalancedDiscParams(tau=float("nan"))


def test_scheduling_sinc():
    assert scheduling_of(0.0) == 1.0
    assert_allclose(scheduling_of(np.array([0.5, -1.0])), np.sin([0.5, -1.0]) / [0.5, -1.0])


def test_disc_equilibrium_zero_input():
    assert_array_equal(simulate_disc(D, np.zeros(50)), 0.0)


def test_disc_step_halving():
    u = gen_multisine(400, D.T_s, seed=1)
    a = simulate_disc(D, u, substeps=20)
    b = simulate_disc(D, u, substeps=40)
    assert np.max(np.abs(a - b)) < 1e-8


def test_disc_constant_input_steady_state():
    u0 = 0.01
    th = simulate_disc(D, np.full(1000, u0))
    rhs = lambda x: D.K_m / D.tau * u0 - D.stiffness * np.sin(x)  # noqa: E731
    root = brentq(rhs, 0.0, np.pi / 2)
    assert abs(rhs(th[-1])) < 1e-9
    assert abs(th[-1] - root) < 1e-9


def test_disc_rejects_bad_input():
    with pytest.raises(ValueError):
        simulate_disc(D, [0.0, np.inf])
    with pytest.raises(ValueError):
        simulate_disc(D, [0.0], substeps=0)


def test_embedding_coefficients():
    m = embed_lpv(D)
    A1, A20, slope, b = embedding_coefficients(D)
    assert_allclose(m.A[0].coeffs[0], [[A1]], rtol=1e-15)
    assert_allclose(m.A[1].frozen(0.0), [[A20]], rtol=1e-15)
    assert_allclose(m.A[1].frozen(1.0), [[A20 + slope]], rtol=1e-15)
    assert_allclose(m.B[0].coeffs[0], [[b]], rtol=1e-15)
    assert m.delay == 2 and m.A[1].tm.orders == (-2,)
    # arithmetic on the default values
    assert_allclose(A20, 0.874393, atol=1e-6)
    assert_allclose(A1, -1.874393, atol=1e-6)
    assert_allclose(b, 0.144270, atol=1e-6)


def test_frozen_poles_match_oracle():
    m = embed_lpv(D)
    for p in (0.0, 0.5, 1.0):
        assert_allclose(np.sort_complex(frozen_poles(m, [p])), np.sort_complex(frozen_pole_oracle(D, p)), atol=1e-12)
    assert_allclose(np.abs(frozen_poles(m, [0.0])).max(), 1.0, atol=1e-12)
    assert_allclose(np.abs(frozen_poles(m, [1.0])), REF_POLE_MAG_P1, atol=1e-4)


def test_multisine_properties():
    u = gen_multisine(400, D.T_s, seed=3)
    assert_allclose(np.max(np.abs(u)), 0.25, rtol=1e-15)
    assert_array_equal(u, gen_multisine(400, D.T_s, seed=3))
    assert not np.array_equal(u, gen_multisine(400, D.T_s, seed=4))
    mag = np.abs(np.fft.rfft(gen_multisine(400, 1.0, n_freq=10, band=0.75, amplitude=1.0, seed=0)))
    f = np.fft.rfftfreq(400)
    assert mag[f > 0.75 * 0.5 + 0.01].max() < 0.05 * mag.max()


def test_multisine_single_tone():
    u = gen_multisine(200, 1.0, n_freq=1, band=0.5, amplitude=0.25, seed=0)
    t = np.arange(200)
    A = np.column_stack([np.sin(2 * np.pi * 0.25 * t), np.cos(2 * np.pi * 0.25 * t)])
    fit = np.linalg.lstsq(A, u, rcond=None)[0]
    assert_allclose(A @ fit, u, atol=1e-12)


def test_multisine_validation():
    with pytest.raises(ValueError):
        gen_multisine(10, 1.0, n_freq=0)
    with pytest.raises(ValueError):
        gen_multisine(10, 1.0, band=1.5)


def test_noise_snr_statistics():
    y = np.sin(np.linspace(0, 20, 400))
    ratios = []
    for s in range(10):
        n = add_noise_snr(y, 0.0, seed=s) - y
        ratios.append(np.var(n) / np.var(y))
    assert all(abs(r - 1) < 0.2 for r in ratios)
    n20 = add_noise_snr(y, 20.0, seed=0) - y
    assert abs(10 * np.log10(np.var(y) / np.var(n20)) - 20) < 1.0


def test_noise_flags_and_errors():
    y = np.arange(5.0)
    assert_array_equal(add_noise_snr(y, None), y)
    assert_array_equal(add_noise_snr(y, float("inf")), y)
    assert_array_equal(add_noise_snr(y, "none"), y)
    assert not np.array_equal(add_noise_snr(y, 10, seed=1), add_noise_snr(y, 10, seed=2))
    with pytest.raises(ValueError):
        add_noise_snr(np.ones(5), 10)


def test_embedding_tracks_nonlinear_system():
    u = gen_multisine(400, D.T_s, seed=0)
    th = simulate_disc(D, u)
    y = simulate_io(embed_lpv(D), u, as_schedule(th, D.T_s))[:, 0]
    assert bfr(th, y) > 80.0


def test_bench_template_structure():
    for kind in ("arx", "armax", "oe", "bj"):
        assert bench_template(kind).structure == kind
    t = bench_template("bj")
    assert t.n_free == 4 + 5 + 1 + 1


def eq15_template():
    A2 = pmatrix([1.0, 1.0], "affine", tm=make_timemap([-2]))
    return lpvidpoly(A=[np.ones((1, 1)), A2], B=[np.ones((1, 1))], delay=2)


def test_true_structure_self_consistency():
    u_est, u_val = gen_multisine(400, D.T_s, seed=10), gen_multisine(400, D.T_s, seed=11)
    th_est, th_val = simulate_disc(D, u_est), simulate_disc(D, u_val)
    emb = embed_lpv(D)
    y_est = simulate_io(emb, u_est, as_schedule(th_est, D.T_s))
    fit = lpvarx(eq15_template(), Dataset(u_est, as_schedule(th_est, D.T_s), y_est, D.T_s)).model
    y_fit = simulate_model(fit, u_val, as_schedule(th_val, D.T_s))[:, 0]
    y_emb = simulate_io(emb, u_val, as_schedule(th_val, D.T_s))[:, 0]
    assert abs(bfr(th_val, y_fit) - bfr(th_val, y_emb)) < 1e-6


def test_config_validation_and_file(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(N=3)
    with pytest.raises(ValueError):
        ExperimentConfig(snr_list_db=(float("inf"),))
    with pytest.raises(ValueError):
        ExperimentConfig(band=0.0)
    f = tmp_path / "cfg.ini"
    f.write_text("N = 200  # samples\nsnr_list_db = 0, 20\nT_s = 0.05\nseed = 3\n")
    cfg = ExperimentConfig.from_file(f)
    assert cfg.N == 200 and cfg.snr_list_db == (0.0, 20.0) and cfg.disc.T_s == 0.05 and cfg.seed == 3
    f.write_text("colour = red\n")
    with pytest.raises(ValueError):
        ExperimentConfig.from_file(f)


SMALL = dict(N=150, snr_list_db=(10.0, 40.0), iterations=15)


def test_small_experiment_outputs(tmp_path):
    rep = run_experiment(ExperimentConfig(**SMALL), tmp_path)
    for name in ("bfr_table.csv", "errors.csv", "summary.csv", "datasets.csv", "validation.csv",
                 "fig2_datasets.svg", "fig3_bfr_snr.svg", "fig4_validation.svg"):
        assert (tmp_path / name).is_file()
    assert set(rep.bfr) == {"arx", "armax", "oe", "bj"}
    assert all(len(v) == 2 for v in rep.bfr.values())
    assert all(0.0 <= x <= 100.0 for v in rep.bfr.values() for x in v)
    lines = (tmp_path / "datasets.csv").read_text().splitlines()
    assert len(lines) == 1 + 150
    assert lines[0] == "t,u,theta,y_embedding,y_snr10,y_snr40"
    assert len(list((tmp_path / "models").glob("*.json"))) == 8


def test_small_experiment_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_experiment(ExperimentConfig(**SMALL), a)
    run_experiment(ExperimentConfig(**SMALL, workers=2), b)
    for f in sorted(a.rglob("*")):
        if f.is_file():
            assert f.read_bytes() == (b / f.relative_to(a)).read_bytes(), f.name


def test_svg_charts_deterministic():
    x = np.arange(5.0)
    s1 = line_chart(x, {"a": x**2, "b": np.array([0, np.nan, 1, 2, 3])}, "t", "x", "y")
    assert s1 == line_chart(x, {"a": x**2, "b": np.array([0, np.nan, 1, 2, 3])}, "t", "x", "y")
    assert s1.startswith("<svg") and s1.rstrip().endswith("</svg>")
    s2 = bar_chart(["0 dB", "10 dB"], {"ARX": [10.0, np.nan], "OE <x>": [90.0, 95.0]}, "t", "x", "y")
    assert "OE &lt;x&gt;" in s2 and s2.count("<rect") >= 4
