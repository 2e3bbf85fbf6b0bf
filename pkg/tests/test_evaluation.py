import hashlib
import math

import numpy as np
import pytest

from rofc import evaluation as ev
from rofc.diagnostics import materialize_matrix
from rofc.ecc import Codec
from rofc.errors import DatasetError, NoCrossingError
from rofc.protocol import authenticate, enroll
from rofc.quantizer import QuantizerConfig
from rofc.rop import derive_params


def brute_force_rates(subjects, thresholds):
    """Enumerate every trial with plain Python arithmetic."""
    dim = len(subjects[0][1][0])
    genuine, impostor = [], []
    for j, (_, enr_samples) in enumerate(subjects):
        enr = enr_samples[0]
        for i, (_, samples) in enumerate(subjects):
            for s, q in enumerate(samples):
                if i == j and s == 0:
                    continue
                dist = math.sqrt(sum((a - b) ** 2 for a, b in zip(q, enr)))
                score = 1 - dist / math.sqrt(dim)
                (genuine if i == j else impostor).append(score)
    far = [sum(s > t for s in impostor) / len(impostor) for t in thresholds]
    frr = [sum(s <= t for s in genuine) / len(genuine) for t in thresholds]
    return far, frr, len(genuine), len(impostor)


# ---- schedule and synthetic data -------------------------------------------


def test_threshold_schedule():
    t = ev.threshold_schedule()
    assert len(t) == 50
    assert t[0] == 0.10 and t[12] == 0.22 and t[49] == 0.59
    assert np.allclose(np.diff(t), 0.01)


def test_synthetic_shape_and_determinism():
    a = ev.gen_synthetic(153, 20, 200, 0.05, 7)
    assert a.num_subjects == 153 and set(a.sample_counts()) == {20} and a.dim == 200
    assert a == ev.gen_synthetic(153, 20, 200, 0.05, 7)
    assert a != ev.gen_synthetic(153, 20, 200, 0.05, 8)
    x, _, _ = a.stacked()
    assert x.min() >= 0 and x.max() <= 1


def test_synthetic_vanishing_noise():
    ds = ev.gen_synthetic(3, 4, 6, 1e-300, 1)
    for _, samples in ds.subjects:
        assert np.all(samples == samples[0])


@pytest.mark.parametrize("args", [(3, 2, 5, 0.1), (3, 2, 4, 0.0), (0, 2, 4, 0.1)])
def test_synthetic_rejects_bad_shapes(args):
    with pytest.raises(ValueError):
        ev.gen_synthetic(*args, seed=0)


# ---- baseline ----------------------------------------------------------------

TINY = ev.Dataset(
    (
        ("a", [[0.0, 0.0, 0.0, 0.0], [0.2, 0.0, 0.0, 0.0]]),
        ("b", [[1.0, 1.0, 1.0, 1.0], [1.0, 1.0, 0.4, 1.0]]),
        ("c", [[0.5, 0.5, 0.5, 0.5], [0.5, 0.5, 0.5, 0.1]]),
    )
)


def test_tiny_baseline_hand_table():
    # genuine distances: 0.2, 0.6, 0.4 -> scores 0.9, 0.7, 0.8
    # impostor vs a: b0 2.0, b1 sqrt(3.16), c0 1.0, c1 sqrt(0.76)
    # impostor vs b: a0 2.0, a1 sqrt(3.64), c0 1.0, c1 sqrt(1.56)
    # impostor vs c: a0 1.0, a1 sqrt(0.84), b0 1.0, b1 sqrt(0.76)
    curve = ev.baseline_rates(TINY, [0.2, 0.45, 0.55, 0.75, 0.85])
    assert (curve.n_genuine, curve.n_impostor) == (3, 12)
    # impostor scores 1 - d/2: 0, .046, .111, .376, .5 x4, .542, .564 x2
    np.testing.assert_array_equal(curve.far, [8 / 12, 7 / 12, 2 / 12, 0, 0])
    np.testing.assert_array_equal(curve.frr, [0, 0, 0, 1 / 3, 2 / 3])
    far, frr, _, _ = brute_force_rates(TINY.subjects, curve.knobs)
    np.testing.assert_array_equal(curve.far, far)
    np.testing.assert_array_equal(curve.frr, frr)


def test_baseline_boundaries():
    ds = ev.gen_synthetic(4, 3, 6, 0.1, 2)
    curve = ev.baseline_rates(ds, [-1.0, 2.0])
    assert (curve.far[0], curve.frr[0]) == (1.0, 0.0)
    assert (curve.far[1], curve.frr[1]) == (0.0, 1.0)


@pytest.mark.parametrize("seed", range(10))
def test_baseline_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    subjects = tuple(
        (f"s{i}", rng.random((int(rng.integers(1, 4)), 6))) for i in range(int(rng.integers(2, 5)))
    )
    if all(len(s) < 2 for _, s in subjects):
        subjects = subjects + (("extra", rng.random((2, 6))),)
    ds = ev.Dataset(subjects)
    curve = ev.baseline_rates(ds)
    far, frr, n_gen, n_imp = brute_force_rates(ds.subjects, curve.knobs)
    np.testing.assert_array_equal(curve.far, far)
    np.testing.assert_array_equal(curve.frr, frr)
    assert (curve.n_genuine, curve.n_impostor) == (n_gen, n_imp) == ds.trial_counts()
    assert curve.is_monotone()


def test_trial_accounting_uneven():
    ds = ev.Dataset((("a", np.zeros((1, 4))), ("b", np.ones((3, 4))), ("c", np.full((2, 4), 0.5))))
    # genuine: 0 + 2 + 1; impostor: 6 samples * 3 enrollments - 6 own samples
    assert ds.trial_counts() == (3, 12)


def test_baseline_needs_two_subjects():
    with pytest.raises(DatasetError):
        ev.baseline_rates(ev.Dataset((("a", np.zeros((3, 4))),)))


# ---- EER ---------------------------------------------------------------------


def test_eer_exact_point():
    curve = ev.RateCurve([1, 2, 3], [0.01, 0.09, 0.3], [0.5, 0.09, 0.0], ev.CORRECTION_RADIUS)
    assert ev.compute_eer(curve) == ev.EerResult(0.09, 2.0)


def test_eer_symmetric_crossing():
    knobs = np.linspace(0, 1, 11)
    curve = ev.RateCurve(knobs, knobs, 1 - knobs, ev.CORRECTION_RADIUS)
    res = ev.compute_eer(curve)
    assert res.eer == pytest.approx(0.5) and res.knob_at_eer == pytest.approx(0.5)


def test_eer_interpolation_closed_form():
    # segment (0.3: far .1 frr .4) -> (0.4: far .3 frr .2)
    # far = .1 + 2(t-.3), frr = .4 - 2(t-.3) -> t = .375, eer = .25
    curve = ev.RateCurve([0.2, 0.3, 0.4], [0.0, 0.1, 0.3], [0.6, 0.4, 0.2], ev.DISTANCE_THRESHOLD)
    res = ev.compute_eer(curve)
    assert res.eer == pytest.approx(0.25) and res.knob_at_eer == pytest.approx(0.375)


def test_eer_no_crossing():
    curve = ev.RateCurve([1, 3, 5], [0.0, 0.01, 0.02], [0.9, 0.5, 0.3], ev.CORRECTION_RADIUS)
    with pytest.raises(NoCrossingError) as info:
        ev.compute_eer(curve)
    assert info.value.closest == (5.0, 0.02, 0.3)


def test_rate_curve_validation():
    with pytest.raises(ValueError):
        ev.RateCurve([1, 1], [0, 0], [0, 0], ev.CORRECTION_RADIUS)
    with pytest.raises(ValueError):
        ev.RateCurve([1, 2], [0, 0], [0, 0], "speed")


# ---- protected pipeline -------------------------------------------------------


def manual_protected_trace(ds, m, seed):
    """Step-by-step rep<m> pipeline with dense matrices and Python loops."""
    rng = np.random.default_rng(seed)
    seeds = [rng.bytes(32) for _ in ds.subjects]
    k = ds.dim // m
    keys = np.random.default_rng([seed, m]).integers(0, 2, (ds.num_subjects, k), dtype=np.uint8)

    def template(x, s):
        p = derive_params(s, ds.dim)
        y = materialize_matrix(p) @ (np.asarray(x) - 0.5) + p.translation
        return [int(v >= t) for v, t in zip(y, p.translation)][: k * m]

    def digest(bits):
        packed = bytearray((len(bits) + 7) // 8)
        for i, b in enumerate(bits):
            packed[i // 8] |= b << (7 - i % 8)
        return hashlib.sha256(len(bits).to_bytes(4, "little") + bytes(packed)).digest()

    table = {}
    for j, (_, enr) in enumerate(ds.subjects):
        key = [int(b) for b in keys[j]]
        codeword = [b for b in key for _ in range(m)]
        hd = [c ^ t for c, t in zip(codeword, template(enr[0], seeds[j]))]
        for i, (_, samples) in enumerate(ds.subjects):
            for s, q in enumerate(samples):
                if i == j and s == 0:
                    continue
                word = [h ^ t for h, t in zip(hd, template(q, seeds[j]))]
                cand = [int(sum(word[g * m : g * m + m]) > m // 2) for g in range(k)]
                table[(j, i, s)] = digest(cand) == digest(key)
    return table


def test_protected_hand_trace():
    ds = ev.gen_synthetic(3, 2, 8, 0.15, 11)
    table = manual_protected_trace(ds, 3, seed=5)
    gen_acc, imp_acc, n_gen, n_imp = ev.protected_trials(ds, [3], "rep", seed=5)
    assert (n_gen, n_imp) == (3, 12) == (
        sum(j == i for j, i, _ in table),
        sum(j != i for j, i, _ in table),
    )
    assert gen_acc[0] == sum(v for (j, i, _), v in table.items() if i == j)
    assert imp_acc[0] == sum(v for (j, i, _), v in table.items() if i != j)


def test_protected_agrees_with_authenticate():
    ds = ev.gen_synthetic(4, 3, 200, 0.25, 3)
    seed = 17
    m_values = [1, 3, 7]
    gen_acc, imp_acc, _, _ = ev.protected_trials(ds, m_values, "ham74", seed=seed)
    rng = np.random.default_rng(seed)
    seeds = [rng.bytes(32) for _ in ds.subjects]
    for a, m in enumerate(m_values):
        codec = Codec.fit(ev.codec_name("ham74", m), 200)
        keys = np.random.default_rng([seed, m]).integers(0, 2, (4, codec.k), dtype=np.uint8)
        g = i_ = 0
        for j, (sid, enr) in enumerate(ds.subjects):
            dev, srv = enroll(sid, enr[0], seeds[j], keys[j], codec)
            for i, (_, samples) in enumerate(ds.subjects):
                for s, q in enumerate(samples):
                    if i == j and s == 0:
                        continue
                    ok = authenticate(q, dev, srv).accepted
                    if i == j:
                        g += ok
                    else:
                        i_ += ok
        assert (gen_acc[a], imp_acc[a]) == (g, i_)


def test_protected_zero_noise_has_no_false_rejects():
    ds = ev.gen_synthetic(6, 3, 200, 1e-300, 4)
    curve = ev.protected_rates(ds, [1, 3, 5, 7], "ham74", seed=1)
    assert np.all(curve.frr == 0)
    assert np.all(curve.far == 0)


def test_protected_monotone_frr_and_determinism():
    ds = ev.gen_synthetic(20, 5, 200, 0.2, 9)
    curve = ev.protected_rates(ds, [1, 3, 5, 7], "ham74", seed=3)
    assert np.all(np.diff(curve.frr) <= 0)
    assert curve.frr[0] > curve.frr[-1]
    assert curve.is_monotone()
    again = ev.protected_rates(ds, [1, 3, 5, 7], "ham74", seed=3)
    np.testing.assert_array_equal(curve.far, again.far)
    np.testing.assert_array_equal(curve.frr, again.frr)


def test_protected_impostors_rarely_pass():
    ds = ev.gen_synthetic(30, 3, 200, 0.3, 5)
    curve = ev.protected_rates(ds, [1, 3, 5], "ham74", seed=2)
    # wrong keys match the digest only by decoding luck, about 2**-k
    assert np.all(curve.far <= 1e-3)


def test_protected_rejects_even_m():
    with pytest.raises(ValueError):
        ev.protected_rates(ev.gen_synthetic(3, 2, 8, 0.1, 0), [2], "rep")


# ---- calibration ---------------------------------------------------------------


def test_calibrate_small_population():
    sigma, eer, ds = ev.calibrate_sigma(0.09, num_subjects=40, samples_per_subject=6, dim=200, seed=3)
    assert abs(eer - 0.09) < 0.02
    assert ds == ev.gen_synthetic(40, 6, 200, sigma, 3)


# ---- CSV --------------------------------------------------------------------------


def test_load_small_file(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("subject_id,sample_id,f0,f1,f2,f3\nA,0,0.1,0.2,0.3,0.4\nB,0,1,0,1,0\n")
    ds = ev.load_dataset(path)
    assert ds.num_subjects == 2 and ds.sample_counts() == [1, 1] and ds.dim == 4


def test_ragged_row_reports_line(tmp_path):
    header = "subject_id,sample_id," + ",".join(f"f{i}" for i in range(200))
    good = "A,0," + ",".join(["0.5"] * 200)
    bad = "A,1," + ",".join(["0.5"] * 199)
    path = tmp_path / "d.csv"
    path.write_text("\n".join([header, good, bad]) + "\n")
    with pytest.raises(DatasetError) as info:
        ev.load_dataset(path)
    assert info.value.row == 3


@pytest.mark.parametrize(
    "text,row",
    [
        ("id,sample_id,f0\nA,0,1\n", 1),
        ("subject_id,sample_id,f0,f1\nA,0,1,x\n", 2),
        ("subject_id,sample_id,f0,f1\nA,0,1,0\nB,0,nan,0\n", 3),
        ("subject_id,sample_id,f0\n", 2),
        ("", 1),
    ],
)
def test_ingestion_errors(tmp_path, text, row):
    path = tmp_path / "d.csv"
    path.write_text(text)
    with pytest.raises(DatasetError) as info:
        ev.load_dataset(path)
    assert info.value.row == row


def test_csv_round_trip(tmp_path):
    ds = ev.gen_synthetic(5, 4, 10, 0.2, 123)
    path = tmp_path / "d.csv"
    ev.save_dataset(ds, path)
    assert ev.load_dataset(path) == ds


def test_curve_csv_and_summary(tmp_path):
    curve = ev.RateCurve([0.1, 0.2], [0.4, 0.1], [0.0, 0.3], ev.DISTANCE_THRESHOLD, 3, 4)
    curve.to_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "knob,far,frr" and len(lines) == 3
    summary = ev.curve_summary(curve)
    assert summary["eer"] == pytest.approx(0.2)
