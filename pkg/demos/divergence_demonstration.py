"""
Why a decay hypothesis is needed at all
=======================================

For a compactly supported bump coefficient, the averaged kernel integral
F(2s) admits a closed-form lower bound that grows like t^alpha, so its
running integral cannot stay bounded. The table below shows the running
integral outrunning the bound across two decades.

Run with:  python3 demos/divergence_demonstration.py
"""

import numpy as np

from fracasym import Coefficient, TailModel, f_l1_divergence

ALPHA = 0.5

# unit plateau on [0.5, 2] with steep entry/exit ramps; identically zero
# outside, so the envelope amplitude only needs to cover the plateau
pts = [[0.0, 0.0], [0.5 - 1e-4, 0.0], [0.5, 1.0],
       [2.0, 1.0], [2.0 + 1e-4, 0.0], [3.0, 0.0]]
bump = Coefficient.from_samples(pts, envelope=TailModel("power", 16.0, 4.0, 1.0))

rows = f_l1_divergence(bump, ALPHA, T=1.0,
                       t_samples=np.geomspace(1.05, 100.0, 13))

print(f"{'t':>8}  {'running integral':>17}  {'lower bound':>12}  {'margin':>7}")
for r in rows:
    margin = r["integral"] / r["lower_bound"] - 1.0
    print(f"{r['t']:8.2f}  {r['integral']:17.6f}  {r['lower_bound']:12.6f}  "
          f"{margin:6.1%}")

print()
print("the bound grows like (2t)^alpha / (2 alpha) times the window mass,")
print("so the running integral grows without bound and F is not integrable")
