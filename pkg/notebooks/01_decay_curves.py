# %% [markdown]
# # Decay curves from the regularized Volterra equation
#
# The excited-state amplitude obeys `c(tau) = 1 + int_0^tau kappa(tau - s) c(s) ds`
# with the flat-rate kernel.  We solve it on a uniform grid, check the error
# estimate, and compare with the closed-form approximations at short and
# long times.

# %%
import warnings

import numpy as np

from memdecay import AsymptoticModel, Grid, ResolutionWarning, amplitude_model, from_b_tilde, solve

warnings.simplefilter("ignore", ResolutionWarning)
p = from_b_tilde(10, 1000)
print(p.as_dict())

# %% [markdown]
# ## Short times
#
# On `tau <= 0.1` the grid must resolve the fast rate `(Lambda_tilde - 1) b_tilde`
# near the origin, so the step is 1e-6.

# %%
short = solve(p, grid=Grid.uniform(0.1, 1e-6))
for tau in (0.001, 0.01, 0.05, 0.1):
    k = int(round(tau / 1e-6))
    inter = abs(amplitude_model(AsymptoticModel.Intermediate, tau, p)) ** 2
    print(f"tau={tau:<6} exact={short.abs2()[k]:.6f} intermediate={inter:.6f} "
          f"e^-tau={np.exp(-tau):.6f} err={short.node_error[k]:.1e}")

# %% [markdown]
# The intermediate form tracks the solution to a few tenths of a percent up to
# `tau ~ 0.05` and drifts to 1.5% by `tau = 0.1`.

# %% [markdown]
# ## Long times
#
# Past `tau ~ 18` the `1/tau` tail overtakes `exp(-tau/2)` in the amplitude.

# %%
long = solve(p, grid=Grid.uniform(40.0, 1e-3))
for tau in (10, 15, 20, 25, 30, 35, 40):
    k = int(round(tau / 1e-3))
    km0 = abs(amplitude_model(AsymptoticModel.LargeKM0, float(tau), p)) ** 2
    print(f"tau={tau:<3} exact={long.abs2()[k]:.4e} large-time={km0:.4e} "
          f"ratio={km0 / long.abs2()[k]:.3f} e^-tau={np.exp(-tau):.4e}")

# %% [markdown]
# The large-time form is 20% off at `tau = 20`, 5% off at `tau = 25` and
# within 4% from `tau = 30` on.  The residual comes from the pole sitting at
# `b_tilde - i/2 + O(1/b_tilde)` rather than exactly at `b_tilde - i/2`.

# %% [markdown]
# ## Convergence
#
# Halving the step divides the error by four.

# %%
q = from_b_tilde(10, 10)
ref = solve(q, grid=Grid.uniform(2.0, 1e-5), estimate_error=False).amplitude[::400]
for h in (4e-3, 2e-3, 1e-3):
    c = solve(q, grid=Grid.uniform(2.0, h), estimate_error=False).amplitude[:: int(round(4e-3 / h))]
    print(f"h={h:g} max|c - ref|={np.max(np.abs(c - ref)):.3e}")
