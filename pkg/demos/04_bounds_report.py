# %% [markdown]
# # What the complexity bounds are made of
#
# The smoothed bounds depend on the smallest singular value alpha, on the
# Lipschitz constants of w(lambda) and u(lambda), and on gamma_s, the
# smallest residual left after dropping s columns.  All of these are
# measured here.  The bound formulas use unit constants, so only ratios and
# trends carry meaning.

# %%
import numpy as np

from lassopath import Precision, SmoothingSpec, gen_adversarial, instance_bound_report, smooth

base = gen_adversarial(6)
for sigma in (1e-1, 1e-2, 1e-3):
    inst = smooth(base, SmoothingSpec(sigma, seed=0))
    rep = instance_bound_report(inst, delta=0.1, s_list=(2, 3))
    print(f"sigma={sigma:g}: segments={rep.measured_count} alpha={rep.alpha:.2e} "
          f"L_w={rep.L_w:.2e} (<= {rep.L_w_bound:.2e}) L_u={rep.L_u:.2e} (<= {rep.L_u_bound:.2e})")
    print(f"    count / thm1 bound = {rep.measured_count / rep.thm1_value:.2e}, "
          f"gamma_2 ratio = {rep.gamma_s_ratio[2]:.2e}, alpha ratio = {rep.alpha_ratio:.2e}")

# %% [markdown]
# The smallest singular value grows with the noise level.

# %%
from lassopath.precision import extremal_singular_values

std = gen_adversarial(6, precision=Precision.STANDARD)
for sigma in (1e-3, 1e-2, 1e-1):
    alphas = [extremal_singular_values(smooth(std, SmoothingSpec(sigma, seed=t)).X)[0] for t in range(50)]
    print(f"sigma={sigma:g}: median alpha {np.median(alphas):.3e}")
