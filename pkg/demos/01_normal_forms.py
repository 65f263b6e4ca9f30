"""
Williamson normal form and the WDS factorization.

A positive definite matrix is diagonalized by a symplectic congruence, and
any volume preserving matrix splits into orthogonal, complex-diagonal and
symplectic factors.  Run with ``python demos/01_normal_forms.py``.
"""

import numpy as np

from symcap.symplectic import (commutes_with_j, complex_structure,
                               symplectic_defect, wds_decompose, williamson)

np.set_printoptions(precision=4, suppress=True)
rng = np.random.default_rng(0)

# %% A random positive definite matrix on R^4
X = rng.standard_normal((4, 4))
A = X @ X.T + 0.5 * np.eye(4)
wf = williamson(A)
print("symplectic eigenvalues:", wf.spectrum)
print("S^T D S - A residual:  ", np.linalg.norm(wf.reconstruct() - A))
print("S^T J S - J residual:  ", symplectic_defect(wf.S))

# The ordinary eigenvalues of J A come in pairs +-i d_j
J = complex_structure(2)
print("|eig(J A)|:            ", np.sort(np.abs(np.linalg.eigvals(J @ A)))[::-1])

# %% WDS: T = W D S for a matrix of determinant one
T = rng.standard_normal((4, 4))
T /= abs(np.linalg.det(T)) ** 0.25
f = wds_decompose(T)
print("\nW orthogonal:", np.allclose(f.W.T @ f.W, np.eye(4)))
print("D commutes with J:", commutes_with_j(f.D, 1e-12))
print("S symplectic:", symplectic_defect(f.S) < 1e-9)
print("diag(D):", np.diag(f.D))
