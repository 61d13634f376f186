# %% [markdown]
# # Path complexity on real images
#
# Each instance regresses the centre pixel of an image patch on the other
# pixels in the patch, using 1000 random MNIST images.  The feature
# dimension is size^2 - 1.  Point `LASSOPATH_MNIST` at an IDX image file
# (see prepare_mnist_subset.py for building one).

# %%
import os
import sys

from lassopath.harness.experiments import run_mnist
from lassopath.harness.idx import load_idx_images

src = os.environ.get("LASSOPATH_MNIST")
if not src:
    sys.exit("set LASSOPATH_MNIST to an IDX image file")
ds = load_idx_images(src)
print(ds.count, "images of shape", ds.shape)

# %%
res = run_mnist(ds, n=1000, patch_sizes=(3, 5, 7, 9), trials=10, seed=0)
print(res.to_csv())

# %% [markdown]
# The mean count grows roughly linearly in the feature dimension: the
# log-log slope is close to 1, far from exponential.

# %%
print(f"log-log slope: {res.slope():.3f}")
