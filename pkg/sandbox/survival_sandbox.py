import logging

import numpy as np

from coxjumps.hazard_models import CIR, CMY, GammaOU
from coxjumps.kernels import ExponentialKernel
from coxjumps.mc_oracle import McConfig
from coxjumps.report import survival_curve
from coxjumps.utils.logger import setup_logger

setup_logger(logging.INFO)

# Define parameters
t = 0.0
horizons = np.linspace(0.25, 2.0, 8)
jump_indices = [1, 2, 3]
mc = McConfig(n_paths=200_000, seed=1, jump_trunc_eps=1e-3, workers=4, progress=True)

models = {
    "cir": CIR(theta=2.0, kappa=1.0, sigma=0.5, lambda_t=1.0),
    "gamma_ou": GammaOU(theta=1.0, a=2.0, b=4.0, lambda0=0.5),
    "cmy": CMY(C=1.0, M=2.0, Y=0.5, sigma_fn=ExponentialKernel(1.0, 0.5), compensated=False),
}

for name, model in models.items():
    curve = survival_curve(model, t, horizons, jump_indices, routes=("bell", "monte_carlo"), mc_config=mc)
    wide = curve.pivot_table(index=["T", "n"], columns="route", values="probability")
    wide["gap"] = wide["bell"] - wide["monte_carlo"]
    print(name)
    print(wide)
