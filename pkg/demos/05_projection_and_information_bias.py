#!/usr/bin/env python3
"""Information bias, full efficiency, and how projection removes the bias.

A composite likelihood is information-unbiased when its sensitivity
matrix H equals its variability matrix J (the second Bartlett identity).
The two properties 'information-unbiased' and 'fully efficient' are
independent: this demo exhibits all four combinations, then uses the
projection u* = H J^-1 u_c to convert a biased score into an unbiased
estimating function with the same roots and the same Godambe
information.  For the equicorrelated pairwise likelihood the projection
does something stronger: it lands exactly on the full-likelihood score.
"""

import numpy as np

import clik

model = clik.EMVN(3)
theta = model.params(rho=0.4, sigma2=1.5)

print(__doc__)
print("information bias measure ||H - J||_F / ||J||_F (exact moments):\n")

specs = [("chain", clik.chain(3)),
         ("full likelihood", clik.full_likelihood(3)),
         ("pairwise", clik.pairwise(3)),
         ("full conditional", clik.full_conditional(3))]
for name, spec in specs:
    exact = clik.info_exact(spec, model, theta)
    print(f"  {name:18s} bias = {clik.info_bias_measure(exact):8.5f}")

print("""
The chain f(y1) f(y2|y1) f(y3|y1,y2) is information-unbiased by
construction (it is the full likelihood in disguise); pairwise and
full-conditional are biased.  Efficiency is a separate axis: the pairwise
spec here is information-BIASED yet fully EFFICIENT:
""")

rep = clik.full_efficiency_check(clik.pairwise(3), model, theta, 20_000, 11)
print(f"  score recovery u = H J^-1 u_c: fully_efficient={rep.fully_efficient}, "
      f"offset estimate {np.round(rep.b_estimate, 4)}, "
      f"max residual z = {rep.max_residual_z:.2f}")

mult = clik.Multinomial4(5.0)
rep2 = clik.full_efficiency_check(clik.pairwise(3), mult, mult.params(0.2),
                                  20_000, 13)
print(f"  multinomial pairwise (k=5): fully_efficient={rep2.fully_efficient}, "
      f"residual covariance lambda_max = {rep2.lambda_max:.4f}")

# --- projection ---------------------------------------------------------------

print("\nprojection of the pairwise score:")
spec = clik.pairwise(3)
exact = clik.info_exact(spec, model, theta)
Y = model.sample(theta, 1000, 17)
uc = clik.composite_score(spec, model, Y, theta)
u_full = model.full_score(Y, theta)
u_star = clik.project_score(exact, uc)
print(f"  sup |projected - full score| over 1000 draws: "
      f"{np.max(np.abs(u_star - u_full)):.2e}")

proj = clik.projected_info_monte_carlo(spec, model, theta, 100_000, 19, exact)
print(f"  projected score: bias measure {clik.info_bias_measure(proj):.5f} "
      f"(z = {clik.info_bias_zscore(proj):.2f}); Godambe information "
      f"preserved to {np.max(np.abs(proj.godambe - exact.godambe)):.3f} (MC noise)")

print("""
The projected estimating function is information-unbiased, keeps the
Godambe information, and (because H J^-1 is constant in the data) has the
same roots, so the point estimator is untouched.
""")
