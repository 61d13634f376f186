# %% [markdown]
# # A Lasso path with exponentially many pieces
#
# The regularization path of the Lasso is piecewise linear in lambda.  Here
# we build the recursive worst-case design, solve its path exactly and watch
# the segment count grow like (3^d + 1) / 2.

# %%
import time

from lassopath import Precision, gen_adversarial, solve_path

# %% [markdown]
# Extended precision (113-bit significands) is needed: the recursion scales
# each new column by a factor below the smallest breakpoint seen so far, so
# the breakpoints span many orders of magnitude.

# %%
for d in range(1, 9):
    t0 = time.perf_counter()
    path = solve_path(gen_adversarial(d), Precision.EXTENDED)
    print(f"d={d}: {path.count:5d} segments (expected {(3**d + 1) // 2:5d})"
          f"  smallest breakpoint {float(min(path.breakpoints[1:], default=path.lambda_max)):.3e}"
          f"  {time.perf_counter() - t0:.2f}s")

# %% [markdown]
# The first few sign patterns for d = 3.  Each row is the sign vector of
# w(lambda) on one segment, from lambda_max downwards.

# %%
path = solve_path(gen_adversarial(3))
for seg in path.segments:
    signs = "".join("+" if s > 0 else "-" if s < 0 else "0" for s in seg.sign_vector)
    print(f"[{float(seg.lambda_lo):.4e}, {float(seg.lambda_hi):.4e}]  {signs}")

# %% [markdown]
# In float64 the same design breaks down once the active-set Gram matrix
# becomes numerically singular.

# %%
from lassopath.precision import SingularActiveSet

try:
    solve_path(gen_adversarial(7, precision=Precision.STANDARD), Precision.STANDARD)
except SingularActiveSet as exc:
    print("standard precision:", exc)
