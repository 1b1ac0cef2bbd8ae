"""How customers choose under the MNL model.

Offer a few assortments to a four-product market, compare the closed-form
purchase shares against simulated frequencies, and find the best
assortment when stock is unlimited.
"""
import numpy as np

from mnlswitch import ProblemInstance, choice_probabilities, expected_revenue, sample_purchase
from mnlswitch.mnl import revenue_ordered_optimum

revenue = np.array([0.9, 0.7, 0.5, 0.2])
pref = np.array([0.4, 1.0, 1.5, 3.0])
inst = ProblemInstance(revenue, np.full((4, 1), 0.5), [0.5], 1000, pref, 3.0)
rng = np.random.default_rng(0)

for S in [(1,), (1, 2), (1, 2, 3), (1, 2, 3, 4)]:
    p = choice_probabilities(S, pref)
    draws = np.array([sample_purchase(S, pref, rng) for _ in range(20000)])
    freq = [np.mean(draws == i) for i in (0,) + S]
    print(f"offer {S}: expected revenue {expected_revenue(S, pref, inst):.4f}")
    print("   option   share   simulated")
    for i, f in zip((0,) + S, freq):
        print(f"   {i:>6}   {p[i]:.4f}  {f:.4f}")

# Adding the cheap, popular product 4 steals demand from the expensive ones.
# The unconstrained optimum is always one of the revenue-ordered nested sets.
best, value = revenue_ordered_optimum(revenue, pref)
print(f"\nbest assortment without stock limits: {best}, revenue per customer {value:.4f}")
