"""Write the 5000-image MNIST sample shipped inside the ``mlxtend`` wheel as an IDX file.

Use this when the official ``train-images-idx3-ubyte`` file is unavailable::

    pip download --no-deps -d /tmp/wheels mlxtend
    python demos/prepare_mnist_subset.py /tmp/wheels/mlxtend-*.whl mnist5k-images-idx3-ubyte

The CSV inside the wheel holds one image per row (784 pixels, then the label).
"""
import gzip
import io
import sys
import zipfile

import numpy as np

from lassopath.harness.idx import write_idx_images

wheel, out = sys.argv[1], sys.argv[2]
with zipfile.ZipFile(wheel) as zf:
    raw = gzip.decompress(zf.read("mlxtend/data/data/mnist_5k.csv.gz"))
table = np.loadtxt(io.BytesIO(raw), delimiter=",", dtype=np.int64)
images = table[:, :784].reshape(-1, 28, 28)
assert images.min() >= 0 and images.max() <= 255
write_idx_images(images.astype(np.uint8), out)
print(f"wrote {images.shape[0]} images to {out}")
