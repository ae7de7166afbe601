"""Parameter-varying matrices: construction, algebra, shifts and evaluation.

Run: python3 demos/pmatrix_basics.py
"""

import numpy as np

from lpvkit import pvmatrix as pm
from lpvkit.pvmatrix import pdiff, pmatrix, preal, pshift
from lpvkit.scheduling import SchedulingTrajectory, extend_trajectory, make_timemap

# A(p) = A0 + A1 p_t + A2 p_{t-1}; affine indices follow the declared order [0, -1]
A0, A1, A2 = np.eye(2), np.diag([1.0, 2.0]), np.ones((2, 2))
A = pmatrix([A0, A1, A2], "affine", [0, 1, 2], make_timemap([0, -1]))
print(A)

# the same matrix from operators
p = preal("p")
B = A0 + A1 * p + A2 * pshift(p, -1)
print("structurally equal:", A.equals(B))

# evaluation along a trajectory: rows of the extended signal are (p_{t-1}, p_t)
traj = SchedulingTrajectory(np.array([0.0, 0.5, 1.0, 1.5]), ["p"])
ext = extend_trajectory(A.tm, traj)
print("extended samples:\n", ext.samples)
print("A at the last instant:\n", A.eval(ext.samples[-1]))

# products escalate affine terms to monomials
Q = (1 + p) * (1 - p)
print(Q, "at p=2:", Q.eval([2.0])[0, 0])

# matrix operations act term by term and commute with evaluation
K = pm.kron(np.eye(2), p) @ pm.vstack([p, 1 + p * p])
print("kron/vstack/matmul at p=3:", K.eval([3.0]).ravel())

# continuous-time derivative by the product rule
pc = preal("p", "ct")
print(pdiff(pc * pc))
