# %% [markdown]
# # Parity, the C operator and the metric
#
# A two-level PT dimer shows every object in closed form.  The same tools are
# then applied to a four-site charge, where part of the spectrum is complex
# and C can only be built on the real sector.

# %%
import numpy as np

from ptrg.eig import eig_general
from ptrg.model import XYZFieldParams, build_charge, build_fields_xyz
from ptrg.ptsym import metric_rho, parity_op, pseudo_hermiticity_residual, signature_and_c
from ptrg.qops import SpinSystem

a, b = 0.5, 1.0
h = np.array([[1j * a, b], [b, -1j * a]])
swap = np.array([[0, 1], [1, 0]], dtype=complex)
pt = signature_and_c(eig_general(h), swap)
print("eigenvalues:", np.round(eig_general(h).eigenvalues, 6))
print("signature:", pt.signature)
print("C =\n", np.round(pt.C, 6))

# %% [markdown]
# The metric PC intertwines the Hamiltonian with its adjoint and is positive
# in the unbroken phase.

# %%
m = metric_rho(swap, pt.C, h)
print("intertwining residual:", m.intertwining, "smallest eigenvalue:", m.min_eigenvalue)

# %% [markdown]
# For a four-site charge the parity is the product of Pauli z matrices.  The
# charge is P-pseudo-Hermitian, but four of its eigenvalues are complex, so
# the default call raises and the restricted mode builds C on the rest.

# %%
system = SpinSystem(4)
cs = build_fields_xyz(XYZFieldParams(1.0, 1.0, 0.5, 0.5, 0.5j, 0.5j, (0.1, 0.3, 0.5, 0.7), 0.1))
q1 = build_charge(system, cs, 0)
p = parity_op(system)
print("pseudo-Hermiticity residual:", pseudo_hermiticity_residual(q1, p))
restricted = signature_and_c(eig_general(q1), p, broken="restrict")
print("sector size:", restricted.diagnostics["sector_size"])
print("C^2 minus projector:", restricted.diagnostics["c_squared"])
