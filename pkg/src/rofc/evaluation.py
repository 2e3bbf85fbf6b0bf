"""FAR / FRR / EER evaluation for the unprotected matcher and the protected pipeline.

Protocol: the first sample of every subject is enrolled. Genuine trials
are the subject's remaining samples against that enrollment; impostor
trials are every sample of every other subject against it.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import commitment, protocol
from .ecc import Codec
from .errors import DatasetError, DimensionError, NoCrossingError
from .quantizer import QuantizerConfig
from .rop import check_dim

DISTANCE_THRESHOLD = "distance_threshold"
CORRECTION_RADIUS = "correction_radius"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature vectors grouped by subject.

    ``subjects`` is a sequence of ``(subject_id, samples)`` with ``samples``
    an ``(n_i, dim)`` array. Sample order matters: index 0 is enrolled.
    """

    subjects: tuple

    def __post_init__(self):
        subjects = []
        dim = None
        for sid, samples in self.subjects:
            arr = np.array(samples, dtype=np.float64, ndmin=2)
            if arr.ndim != 2 or arr.shape[0] == 0:
                raise DatasetError(f"subject {sid!r} needs a non-empty 2-D sample array")
            if dim is None:
                dim = arr.shape[1]
            elif arr.shape[1] != dim:
                raise DatasetError(f"subject {sid!r} has dimension {arr.shape[1]}, expected {dim}")
            arr.setflags(write=False)
            subjects.append((str(sid), arr))
        if not subjects:
            raise DatasetError("dataset has no subjects")
        object.__setattr__(self, "subjects", tuple(subjects))

    @property
    def dim(self) -> int:
        return self.subjects[0][1].shape[1]

    @property
    def num_subjects(self) -> int:
        return len(self.subjects)

    def sample_counts(self) -> list:
        return [s.shape[0] for _, s in self.subjects]

    def stacked(self):
        """All samples as one array plus owner index and within-subject index."""
        x = np.concatenate([s for _, s in self.subjects])
        owner = np.repeat(np.arange(self.num_subjects), self.sample_counts())
        index = np.concatenate([np.arange(c) for c in self.sample_counts()])
        return x, owner, index

    def trial_counts(self):
        """Closed-form ``(genuine, impostor)`` trial counts."""
        counts = np.array(self.sample_counts())
        genuine = int((counts - 1).sum())
        impostor = int(counts.sum() * len(counts) - counts.sum())
        return genuine, impostor

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return len(self.subjects) == len(other.subjects) and all(
            a == c and np.array_equal(b, d) for (a, b), (c, d) in zip(self.subjects, other.subjects)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class RateCurve:
    knobs: np.ndarray
    far: np.ndarray
    frr: np.ndarray
    knob_kind: str
    n_genuine: int = 0
    n_impostor: int = 0

    def __post_init__(self):
        for name in ("knobs", "far", "frr"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if not (self.knobs.shape == self.far.shape == self.frr.shape) or self.knobs.ndim != 1:
            raise ValueError("knobs, far and frr must be 1-D and of equal length")
        if np.any(np.diff(self.knobs) <= 0):
            raise ValueError("knobs must be strictly increasing")
        if self.knob_kind not in (DISTANCE_THRESHOLD, CORRECTION_RADIUS):
            raise ValueError(f"unknown knob kind {self.knob_kind!r}")

    @property
    def points(self):
        return list(zip(self.knobs.tolist(), self.far.tolist(), self.frr.tolist()))

    def is_monotone(self) -> bool:
        """FAR up and FRR down as the knob moves toward accepting more."""
        far, frr = self.far, self.frr
        if self.knob_kind == DISTANCE_THRESHOLD:
            far, frr = far[::-1], frr[::-1]
        return bool(np.all(np.diff(far) >= 0) and np.all(np.diff(frr) <= 0))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["knob", "far", "frr"])
            for k, a, r in self.points:
                w.writerow([repr(k), repr(a), repr(r)])


@dataclass(frozen=True)
class EerResult:
    eer: float
    knob_at_eer: float


def threshold_schedule() -> list:
    """The 50 match-score thresholds ``0.10 + 0.01 i`` for ``i = 0..49``."""
    return [round(0.1 + 0.01 * i, 2) for i in range(50)]


def gen_synthetic(num_subjects, samples_per_subject, dim, sigma, seed) -> Dataset:
    """Synthetic population: uniform subject means plus clamped Gaussian noise."""
    dim = check_dim(dim)
    if num_subjects < 1 or samples_per_subject < 1:
        raise ValueError("need at least one subject and one sample per subject")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    means = rng.random((num_subjects, 1, dim))
    noise = rng.normal(0.0, sigma, (num_subjects, samples_per_subject, dim))
    samples = np.clip(means + noise, 0.0, 1.0)
    return Dataset(tuple((f"s{i:04d}", samples[i]) for i in range(num_subjects)))


def match_scores(ds: Dataset):
    """Genuine and impostor scores ``1 - ||q - e|| / sqrt(dim)``."""
    x, owner, index = ds.stacked()
    genuine, impostor = [], []
    scale = math.sqrt(ds.dim)
    for j, (_, samples) in enumerate(ds.subjects):
        scores = 1.0 - np.linalg.norm(x - samples[0], axis=1) / scale
        genuine.append(scores[(owner == j) & (index > 0)])
        impostor.append(scores[owner != j])
    return np.concatenate(genuine), np.concatenate(impostor)


def baseline_rates(ds: Dataset, thresholds: Optional[Sequence[float]] = None) -> RateCurve:
    """Unprotected matcher; a trial is accepted iff its score exceeds the threshold."""
    if ds.num_subjects < 2:
        raise DatasetError("impostor trials need at least two subjects")
    if thresholds is None:
        thresholds = threshold_schedule()
    t = np.asarray(thresholds, dtype=np.float64)
    genuine, impostor = match_scores(ds)
    far = (impostor[None, :] > t[:, None]).mean(axis=1)
    frr = (genuine[None, :] <= t[:, None]).mean(axis=1) if genuine.size else np.zeros_like(t)
    return RateCurve(t, far, frr, DISTANCE_THRESHOLD, genuine.size, impostor.size)


def codec_name(codec_base: str, m: int) -> str:
    if codec_base == "rep":
        return f"rep{m}"
    if codec_base == "ham74":
        return "ham74" if m == 1 else f"ham74+rep{m}"
    raise ValueError(f"codec base must be 'rep' or 'ham74', got {codec_base!r}")


def protected_trials(ds, m_values, codec_base="ham74", cfg=QuantizerConfig(), seed=0):
    """Accept counts for the full enroll/authenticate pipeline.

    Returns ``(genuine_accepts, impostor_accepts, n_genuine, n_impostor)``,
    the first two indexed like ``m_values``. Each subject gets its own
    projection seed; keys are redrawn per ``m`` because ``k`` changes with
    the codec. Impostors present their features against the victim's
    device record.
    """
    m_values = [int(m) for m in m_values]
    if any(m < 1 or m % 2 == 0 for m in m_values):
        raise ValueError("repetition factors must be odd and positive")
    check_dim(ds.dim)
    if ds.num_subjects < 2:
        raise DatasetError("impostor trials need at least two subjects")

    bits_available = cfg.output_length(ds.dim)
    codecs = [Codec.fit(codec_name(codec_base, m), bits_available) for m in m_values]
    rng = np.random.default_rng(seed)
    seeds = [rng.bytes(32) for _ in range(ds.num_subjects)]
    keys = [
        np.random.default_rng([seed, m]).integers(0, 2, (ds.num_subjects, c.k), dtype=np.uint8)
        for m, c in zip(m_values, codecs)
    ]

    x, owner, index = ds.stacked()
    gen_acc = np.zeros(len(m_values), dtype=np.int64)
    imp_acc = np.zeros(len(m_values), dtype=np.int64)
    for j, (sid, samples) in enumerate(ds.subjects):
        genuine = (owner == j) & (index > 0)
        impostor = owner != j
        templates = protocol.cancelable_template(x, seeds[j], cfg)
        for a, codec in enumerate(codecs):
            _, srv = protocol.enroll(sid, samples[0], seeds[j], keys[a][j], codec, cfg, created_at=0)
            candidates, _ = commitment.recover(templates[:, : codec.n], srv.helper)
            target = srv.helper.key_digest
            accepted = np.fromiter(
                (d == target for d in commitment.key_digests(candidates)), dtype=bool, count=len(x)
            )
            gen_acc[a] += int(accepted[genuine].sum())
            imp_acc[a] += int(accepted[impostor].sum())
    n_gen, n_imp = ds.trial_counts()
    return gen_acc, imp_acc, n_gen, n_imp


def protected_rates(ds, m_values, codec_base="ham74", cfg=QuantizerConfig(), seed=0) -> RateCurve:
    """FAR/FRR of the protected pipeline as a function of the repetition factor."""
    gen_acc, imp_acc, n_gen, n_imp = protected_trials(ds, m_values, codec_base, cfg, seed)
    far = imp_acc / n_imp
    frr = 1.0 - gen_acc / n_gen if n_gen else np.zeros(len(gen_acc))
    return RateCurve(np.asarray(m_values, float), far, frr, CORRECTION_RADIUS, n_gen, n_imp)


def compute_eer(curve: RateCurve) -> EerResult:
    """Equal error rate by linear interpolation at the first FAR/FRR sign change.

    Raises:
      NoCrossingError: if FAR - FRR never changes sign.
    """
    diff = curve.far - curve.frr
    for i in range(diff.size):
        if diff[i] == 0:
            return EerResult(float(curve.far[i]), float(curve.knobs[i]))
        if i + 1 < diff.size and diff[i] * diff[i + 1] < 0:
            w = diff[i] / (diff[i] - diff[i + 1])
            eer = curve.far[i] + w * (curve.far[i + 1] - curve.far[i])
            knob = curve.knobs[i] + w * (curve.knobs[i + 1] - curve.knobs[i])
            return EerResult(float(eer), float(knob))
    if diff.size == 0:
        raise NoCrossingError("empty curve", None)
    best = int(np.argmin(np.abs(diff)))
    closest = (float(curve.knobs[best]), float(curve.far[best]), float(curve.frr[best]))
    raise NoCrossingError(f"FAR and FRR do not cross; closest point {closest}", closest)


def _baseline_eer_signed(ds: Dataset) -> float:
    """Baseline EER, or -inf / +inf when the crossing lies outside the schedule."""
    curve = baseline_rates(ds)
    try:
        return compute_eer(curve).eer
    except NoCrossingError:
        return -math.inf if np.all(curve.far >= curve.frr) else math.inf


def calibrate_sigma(
    target=0.09,
    num_subjects=153,
    samples_per_subject=20,
    dim=200,
    seed=0,
    lo=0.3,
    hi=1.5,
    tol=1e-3,
    max_iter=40,
):
    """Bisect the noise level so the baseline EER hits ``target``.

    Returns ``(sigma, eer, dataset)``. The dataset seed is fixed, so the
    search is deterministic.
    """
    best = None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        ds = gen_synthetic(num_subjects, samples_per_subject, dim, mid, seed)
        eer = _baseline_eer_signed(ds)
        if math.isfinite(eer) and (best is None or abs(eer - target) < abs(best[1] - target)):
            best = (mid, eer, ds)
        if math.isfinite(eer) and abs(eer - target) <= tol:
            break
        if eer < target:
            lo = mid
        else:
            hi = mid
    if best is None:
        raise NoCrossingError("no noise level in range gives a baseline crossing", None)
    return best


def save_dataset(ds: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["subject_id", "sample_id"] + [f"f{i}" for i in range(ds.dim)])
        for sid, samples in ds.subjects:
            for i, row in enumerate(samples):
                w.writerow([sid, str(i)] + [repr(float(v)) for v in row])


def load_dataset(path) -> Dataset:
    """Read the ``subject_id,sample_id,f0..f{d-1}`` CSV format.

    Subjects keep first-appearance order and samples keep file order.

    Raises:
      DatasetError: with the offending 1-based line number.
    """
    groups = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError("empty file", row=1) from None
        dim = len(header) - 2
        expected = ["subject_id", "sample_id"] + [f"f{i}" for i in range(dim)]
        if dim < 1 or [h.strip() for h in header] != expected:
            raise DatasetError("unknown header, expected subject_id,sample_id,f0,f1,...", row=1)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 2:
                raise DatasetError(f"expected {dim} feature values, got {len(row) - 2}", row=line)
            if not row[0]:
                raise DatasetError("empty subject_id", row=line)
            try:
                values = [float(v) for v in row[2:]]
            except ValueError as exc:
                raise DatasetError(f"non-numeric value ({exc})", row=line) from None
            if not all(math.isfinite(v) for v in values):
                raise DatasetError("non-finite value", row=line)
            groups.setdefault(row[0], []).append(values)
    if not groups:
        raise DatasetError("no data rows", row=2)
    return Dataset(tuple((sid, np.array(rows)) for sid, rows in groups.items()))


def curve_summary(curve: RateCurve) -> dict:
    """EER summary dict; ``eer`` is ``None`` when the curve has no crossing."""
    out = {"knob_kind": curve.knob_kind, "n_genuine": curve.n_genuine, "n_impostor": curve.n_impostor}
    try:
        res = compute_eer(curve)
        out.update(eer=res.eer, knob_at_eer=res.knob_at_eer)
    except NoCrossingError as exc:
        out.update(eer=None, knob_at_eer=None, no_crossing=True, closest=exc.closest)
    return out


def write_summary(summary: dict, path) -> None:
    Path(path).write_text(json.dumps(summary) + "\n", encoding="utf-8")
