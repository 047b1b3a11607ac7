"""File formats: Hamiltonian text, dataset binary, partitions, duals, CSV.

Round-trip fidelity is a hard requirement; every format is covered by
golden-file tests. Binary formats are little-endian with fixed magic
bytes, so files are portable across platforms.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import struct
import sys
from dataclasses import asdict, dataclass
from importlib import resources

import numpy as np

from .frames import DualFrame, GlobalDuals
from .observables import PauliObservable
from .partition import Partition
from .povm import pauli6_product
from .sampling import Dataset

__all__ = [
    "RunConfig",
    "read_hamiltonian",
    "write_hamiltonian",
    "bundled_hamiltonian",
    "read_dataset",
    "write_dataset",
    "read_partition",
    "write_partition",
    "read_duals",
    "write_duals",
    "config_hash",
    "write_csv",
]

DATASET_MAGIC = b"ICSD"
DUALS_MAGIC = b"ICDL"
DATASET_HEADER = struct.Struct("<4sHHHQQ")


@dataclass(frozen=True)
class RunConfig:
    """Pipeline defaults shared by the CLI subcommands."""

    seed: int = 0
    S: int = 10**6
    k: int = 4
    partitioner: str = "greedy"
    backend: str = "lad"
    S_bias: float | None = None  # None means d^k at point of use
    floor: float = 1e-10
    dense_cap: int = 8
    drop_identity: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.partitioner not in ("greedy", "naive", "node", "edge"):
            raise ValueError(f"unknown partitioner {self.partitioner!r}")
        if self.backend not in ("bias", "psd", "lad"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.k < 1 or self.S < 0 or self.workers < 1:
            raise ValueError("k and workers must be >= 1 and S >= 0")

    def resolved_S_bias(self, d: int) -> float:
        return float(d**self.k) if self.S_bias is None else float(self.S_bias)

    def tomography_backend(self, d: int):
        from .tomography import ConstrainedLAD, FrequencyBias, LinearInversionPSD

        if self.backend == "bias":
            return FrequencyBias(self.resolved_S_bias(d))
        if self.backend == "psd":
            return LinearInversionPSD()
        return ConstrainedLAD()

    def hash(self) -> str:
        return config_hash(asdict(self))


def config_hash(mapping: dict) -> str:
    """Short stable digest of a flat config mapping, for CSV provenance."""
    blob = "\n".join(f"{k}={mapping[k]!r}" for k in sorted(mapping))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def read_hamiltonian(path) -> PauliObservable:
    terms = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected '<coefficient> <word>', got {line!r}"
                )
            try:
                coeff = float(parts[0])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad coefficient {parts[0]!r}") from None
            word = parts[1].upper()
            if any(ch not in "IXYZ" for ch in word):
                raise ValueError(f"{path}:{lineno}: bad Pauli word {parts[1]!r}")
            if terms and len(word) != len(terms[0][1]):
                raise ValueError(f"{path}:{lineno}: word length differs from earlier lines")
            terms.append((coeff, word))
    if not terms:
        raise ValueError(f"{path}: no Hamiltonian terms found")
    return PauliObservable.from_terms(terms)


def write_hamiltonian(path, obs: PauliObservable, comments=()) -> None:
    with open(path, "w") as fh:
        for comment in comments:
            fh.write(f"# {comment}\n")
        for coeff, word in obs.terms:
            fh.write(f"{coeff:+.14e} {word}\n")


def bundled_hamiltonian(name: str) -> PauliObservable:
    """Load one of the packaged benchmark Hamiltonians by file name."""
    ref = resources.files("icshadows.data").joinpath(name)
    with resources.as_file(ref) as path:
        return read_hamiltonian(path)


def write_dataset(path, ds: Dataset) -> None:
    if ds.povm_id != "pauli6":
        raise ValueError("dataset format v1 stores Pauli-6 datasets only")
    header = DATASET_HEADER.pack(DATASET_MAGIC, 1, ds.n, ds.d, ds.S, ds.seed)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(ds.records.tobytes())


def read_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < DATASET_HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, n, d, S, seed = DATASET_HEADER.unpack_from(blob)
    if magic != DATASET_MAGIC:
        raise ValueError(f"{path}: not a dataset file")
    if version != 1:
        raise ValueError(f"{path}: unsupported version {version}")
    body = blob[DATASET_HEADER.size :]
    if len(body) != S * n:
        raise ValueError(f"{path}: expected {S * n} record bytes, found {len(body)}")
    records = np.frombuffer(body, dtype=np.uint8).reshape(S, n)
    return Dataset(n=n, d=d, S=S, records=records, seed=seed)


def write_partition(path, partition: Partition) -> None:
    with open(path, "w") as fh:
        for group in partition.groups:
            fh.write(" ".join(str(q) for q in group) + "\n")


def read_partition(path) -> Partition:
    groups = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                groups.append(tuple(int(tok) for tok in line.split()))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad group line {line!r}") from None
    if not groups:
        raise ValueError(f"{path}: no groups found")
    return Partition(tuple(groups))


def write_duals(path, duals: GlobalDuals) -> None:
    """Serialize per-group dual operators; v1 covers Pauli-6 frames."""
    n = duals.n
    povm = pauli6_product(n)
    out = bytearray()
    out += struct.pack("<4sHH", DUALS_MAGIC, 1, n)
    out += struct.pack("<H", len(duals.frames))
    for frame in duals.frames:
        if not np.array_equal(frame.effects, povm.group_effects(frame.group)):
            raise ValueError("duals format v1 stores Pauli-6 frames only")
        prov = frame.provenance.encode()
        out += struct.pack("<H", len(frame.group))
        out += struct.pack(f"<{len(frame.group)}H", *frame.group)
        out += struct.pack("<IHH", frame.outcomes, frame.dim, len(prov))
        out += prov
        out += np.ascontiguousarray(frame.duals, dtype=np.complex128).tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(out))


def read_duals(path) -> GlobalDuals:
    with open(path, "rb") as fh:
        blob = fh.read()
    offset = 0

    def take(fmt: str):
        nonlocal offset
        s = struct.Struct(fmt)
        if offset + s.size > len(blob):
            raise ValueError(f"{path}: truncated duals file")
        vals = s.unpack_from(blob, offset)
        offset += s.size
        return vals

    magic, version, n = take("<4sHH")
    if magic != DUALS_MAGIC:
        raise ValueError(f"{path}: not a duals file")
    if version != 1:
        raise ValueError(f"{path}: unsupported version {version}")
    (n_groups,) = take("<H")
    povm = pauli6_product(n)
    frames = []
    groups = []
    for _ in range(n_groups):
        (k,) = take("<H")
        group = take(f"<{k}H")
        outcomes, dim, prov_len = take("<IHH")
        prov = blob[offset : offset + prov_len].decode()
        offset += prov_len
        nbytes = outcomes * dim * dim * 16
        if offset + nbytes > len(blob):
            raise ValueError(f"{path}: truncated duals file")
        duals = np.frombuffer(blob[offset : offset + nbytes], dtype=np.complex128)
        offset += nbytes
        duals = duals.reshape(outcomes, dim, dim)
        frames.append(
            DualFrame(
                group=group,
                effects=povm.group_effects(group),
                duals=duals,
                provenance=prov,
            )
        )
        groups.append(tuple(group))
    if offset != len(blob):
        raise ValueError(f"{path}: trailing bytes after duals payload")
    return GlobalDuals(partition=Partition(tuple(groups)), frames=tuple(frames))


def write_csv(path, header, rows) -> None:
    """Write CSV to a path, or to stdout when path is None or '-'."""
    if path is None or path == "-":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
