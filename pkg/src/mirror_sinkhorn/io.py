"""CSV formats for matrices, marginals, couplings, and tensors.

Plain matrices and marginals are headerless comma-separated floats, one row
per line. Couplings carry a one-line ``m,n`` header; tensors a one-line
``d,m1,...,md`` header followed by the entries in row-major order. Floats
are written with ``repr`` so files round-trip bit-exactly.
"""

from __future__ import annotations

import numpy as np


def write_matrix(path, matrix: np.ndarray) -> None:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    with open(path, "w") as fh:
        for row in matrix:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_matrix(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(x) for x in line.split(",")])
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: ragged rows with widths {sorted(widths)}")
    return np.asarray(rows, dtype=np.float64)


def write_vector(path, vector: np.ndarray) -> None:
    write_matrix(path, np.asarray(vector, dtype=np.float64).reshape(1, -1))


def read_vector(path) -> np.ndarray:
    mat = read_matrix(path)
    if 1 not in mat.shape:
        raise ValueError(f"{path}: expected a vector, got shape {mat.shape}")
    return mat.reshape(-1)


def write_coupling(path, gamma: np.ndarray) -> None:
    gamma = np.asarray(gamma, dtype=np.float64)
    if gamma.ndim != 2:
        raise ValueError(f"coupling must be 2-d, got shape {gamma.shape}")
    with open(path, "w") as fh:
        fh.write(f"{gamma.shape[0]},{gamma.shape[1]}\n")
        for row in gamma:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_coupling(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        try:
            m, n = (int(x) for x in header)
        except ValueError:
            raise ValueError(f"{path}: expected 'm,n' header, got {header!r}") from None
        rows = [[float(x) for x in line.strip().split(",")] for line in fh if line.strip()]
    gamma = np.asarray(rows, dtype=np.float64)
    if gamma.shape != (m, n):
        raise ValueError(f"{path}: header says {(m, n)} but body is {gamma.shape}")
    return gamma


def write_tensor(path, gamma: np.ndarray) -> None:
    gamma = np.asarray(gamma, dtype=np.float64)
    if gamma.ndim < 2:
        raise ValueError(f"tensor must have at least 2 modes, got shape {gamma.shape}")
    flat = gamma.reshape(-1, gamma.shape[-1])
    with open(path, "w") as fh:
        fh.write(",".join(str(x) for x in (gamma.ndim, *gamma.shape)) + "\n")
        for row in flat:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_tensor(path) -> np.ndarray:
    with open(path) as fh:
        header = [int(x) for x in fh.readline().strip().split(",")]
        d, shape = header[0], tuple(header[1:])
        if len(shape) != d:
            raise ValueError(f"{path}: header lists {len(shape)} modes but d={d}")
        values = [float(x) for line in fh if line.strip() for x in line.strip().split(",")]
    flat = np.asarray(values, dtype=np.float64)
    if flat.size != int(np.prod(shape)):
        raise ValueError(f"{path}: expected {int(np.prod(shape))} entries, got {flat.size}")
    return flat.reshape(shape)
