"""
Worst-case inputs
=================

Each family is built to push one algorithm to its bound. The optimum for
each family is known in closed form and has a scripted packing.
"""

# %%
from gbp import adversary
from gbp.algorithms import FIRST_FIT, NEXT_FIT, WORST_FIT, pack
from gbp.core import CostParams, validate
from gbp.offline import scripted_opt


def measured(kind, adv):
    return pack(kind, adv.tau, adv.instance, adv.params).packing.cost() / adv.known_opt_cost


# %%
adv = adversary.gen_nextfit_pairs(1000, CostParams(1, 0.5))
print("NextFit pairs", measured(NEXT_FIT, adv), "target", adv.target_ratio)

adv = adversary.gen_worstfit_pairs(1000, CostParams(1, 0.25))
print("WorstFit pairs", measured(WORST_FIT, adv), "target", adv.target_ratio)

# %%
adv = adversary.gen_aaf_7142(840, CostParams(0.1, 0.9))
print("1/43, 1/7, 1/3, 1/2", measured(FIRST_FIT, adv), "target", adv.target_ratio)
opt = scripted_opt(adv)
print("scripted optimum valid:", validate(adv.instance, opt) == [], opt.cost(), adv.known_opt_cost)

# %%
# Large regime: the staged input defeats every online algorithm
adv = adversary.gen_general_lb_large(600, CostParams(8, 0.5))
print("stages (prefix, opt):", adv.stages, "target", adv.target_ratio)
