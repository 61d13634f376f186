# %% [markdown]
# # Checking the homotopy against brute force
#
# For small d every sign vector in {-1, 0, 1}^d can be tested directly: a
# sign vector fixes the linear piece, and the lambdas where it satisfies
# the optimality conditions form one interval.  Gluing the nonempty
# intervals together gives the whole path without ever following it.

# %%
import numpy as np

from lassopath import enumerate_sign_patterns, eval_path, gen_gaussian, grid_solve, kkt_check, solve_path

inst = gen_gaussian(8, 5, seed=1)
hp = solve_path(inst)
op = enumerate_sign_patterns(inst)
print("homotopy segments:", hp.count, " oracle segments:", op.count)
print("same sign sequence:", hp.sign_sequence == op.sign_sequence)
print("max breakpoint gap:", max(abs(a - b) for a, b in zip(hp.breakpoints, op.breakpoints)))

# %% [markdown]
# A third, independent route: coordinate descent at fixed lambda.

# %%
for lam in np.geomspace(1e-3, float(hp.lambda_max), 6):
    w_cd = grid_solve(inst, lam)
    w_path = eval_path(hp, lam)
    print(f"lambda={lam:.4f}  |w_cd - w_path|={np.max(np.abs(w_cd - w_path)):.1e}"
          f"  kkt={kkt_check(inst, lam, w_path).max_violation:.1e}")

# %% [markdown]
# The batch version used by the test suite.

# %%
from lassopath.harness.experiments import oracle_check

recs = oracle_check(dims=(2, 3, 4, 5), trials=40, seed=0)
print(sum(r["match"] for r in recs), "/", len(recs), "identical")
