"""Eigenface PCA basis used to turn face images into feature vectors.

Training follows the small-covariance route: with m images of d pixels
(m << d) we diagonalise the m x m Gram matrix of the centred images and lift
its eigenvectors back to pixel space.  Eigenvalues are those of the sample
covariance ``Xc^T Xc / (m - 1)``.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTrainingError, DimensionError, ParseError
from .raster import luminance, read_image

MAGIC = b"EIGB1"
IMAGE_EXTENSIONS = (".pgm", ".ppm", ".pnm", ".png")
RELATIVE_EIGEN_FLOOR = 1e-10


def jacobi_eigh(S, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Stops once the off-diagonal Frobenius norm falls below ``tol`` times the
    matrix norm.  Returns ``(eigenvalues, eigenvectors)`` unsorted, vectors in
    columns.
    """
    A = np.array(S, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n) or not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("jacobi_eigh needs a symmetric matrix")
    A = (A + A.T) / 2
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if scale == 0:
        return np.zeros(n), V
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(diff) + 100.0 * abs(apq) == abs(diff):
                    t = apq / diff  # theta would overflow; tan(phi) ~ 1 / (2 theta)
                else:
                    theta = diff / (2.0 * apq)
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                v_p, v_q = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * v_p - s * v_q
                V[:, q] = s * v_p + c * v_q
    return np.diag(A).copy(), V


def _fix_sign(v):
    # largest-magnitude entry made non-negative
    return -v if v[np.argmax(np.abs(v))] < 0 else v


@dataclass(frozen=True)
class EigenBasis:
    mean: np.ndarray         # (d,)
    components: np.ndarray   # (k, d), orthonormal rows
    eigenvalues: np.ndarray  # (k,), descending
    shape: tuple             # (height, width) of training images

    @property
    def k(self):
        return len(self.eigenvalues)

    @property
    def size(self):
        """(width, height)"""
        return self.shape[1], self.shape[0]


def flatten_gray(img, shape=None) -> np.ndarray:
    gray = luminance(img)
    if shape is not None and gray.shape != tuple(shape):
        raise DimensionError(f"image is {gray.shape[1]}x{gray.shape[0]}, basis expects "
                             f"{shape[1]}x{shape[0]}")
    return gray.reshape(-1)


def train_basis(images, k=None) -> EigenBasis:
    images = list(images)
    if len(images) < 2:
        raise DegenerateTrainingError(f"need at least 2 training images, got {len(images)}")
    shape = luminance(images[0]).shape
    X = np.stack([flatten_gray(im, shape) for im in images])
    m = len(X)
    if k is None:
        k = m - 1
    if k < 1:
        raise ValueError(f"component count must be >= 1, got {k}")
    mean = X.mean(axis=0)
    Xc = X - mean
    gram = (Xc @ Xc.T) / (m - 1)
    vals, vecs = jacobi_eigh(gram)
    order = sorted(range(m), key=lambda i: (-vals[i], i))
    top = vals[order[0]]
    if not top > 0:
        raise DegenerateTrainingError("training images are identical (zero variance)")
    comps, kept = [], []
    for i in order:
        if vals[i] < RELATIVE_EIGEN_FLOOR * top or len(kept) == k:
            break
        u = Xc.T @ vecs[:, i]
        comps.append(_fix_sign(u / np.linalg.norm(u)))
        kept.append(vals[i])
    return EigenBasis(mean, np.array(comps), np.array(kept), tuple(shape))


def project(basis: EigenBasis, img) -> np.ndarray:
    return basis.components @ (flatten_gray(img, basis.shape) - basis.mean)


def reconstruct(basis: EigenBasis, coeffs) -> np.ndarray:
    """Mean plus the weighted components, as a (height, width) image."""
    return (basis.mean + np.asarray(coeffs) @ basis.components).reshape(basis.shape)


def list_training_images(train_dir):
    names = sorted(n for n in os.listdir(train_dir) if n.lower().endswith(IMAGE_EXTENSIONS))
    return [os.path.join(train_dir, n) for n in names]


def train_from_dir(train_dir, k=None) -> EigenBasis:
    paths = list_training_images(train_dir)
    if len(paths) < 2:
        raise DegenerateTrainingError(f"{train_dir}: need at least 2 training images, found {len(paths)}")
    return train_basis([read_image(p) for p in paths], k)


def save_basis(path, basis: EigenBasis):
    h, w = basis.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", w, h, basis.k))
        fh.write(basis.mean.astype("<f8").tobytes())
        fh.write(basis.components.astype("<f8").tobytes())
        fh.write(basis.eigenvalues.astype("<f8").tobytes())


def load_basis(path) -> EigenBasis:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:len(MAGIC)] != MAGIC:
        raise ParseError(f"{path}: not an eigenbasis file")
    off = len(MAGIC)
    try:
        w, h, k = struct.unpack_from("<III", data, off)
    except struct.error:
        raise ParseError(f"{path}: truncated header") from None
    off += 12
    d = w * h
    need = off + 8 * (d + k * d + k)
    if len(data) != need:
        raise ParseError(f"{path}: expected {need} bytes, got {len(data)}")
    arr = np.frombuffer(data, dtype="<f8", offset=off).astype(np.float64)
    mean = arr[:d]
    comps = arr[d:d + k * d].reshape(k, d)
    vals = arr[d + k * d:]
    return EigenBasis(mean, comps, vals, (h, w))
