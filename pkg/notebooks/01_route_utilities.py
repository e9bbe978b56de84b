"""
Choosing a flight route by utility
==================================

Four ways to fly from Johannesburg to New York, each with a ticket cost.
Treating utility as inverse cost turns "pick the cheapest" into "maximize
utility", which is the form every later script in this directory uses.
"""

# %%
from ratchoice.utility import (
    Alternative,
    check_transitivity,
    opportunity_cost,
    rank_alternatives,
    utility_comparator,
)

routes = [
    Alternative("JHB-NY", "direct", 18.0),
    Alternative("JHB-DB-NY", "via Dubai", 36.0),
    Alternative("JHB-LN-NY", "via London", 24.0),
    Alternative("JHB-PR-NY", "via Paris", 26.0),
]

# %% [markdown]
# Ranking sorts by utility, highest first; ties would fall back to the id.

# %%
for alt, u in rank_alternatives(routes):
    print(f"{alt.id:10s} cost {alt.cost:5.1f}  utility {u:.8f}")

# %% [markdown]
# The opportunity cost of a choice is the utility of the best option given up.

# %%
print("opportunity cost:", round(opportunity_cost(routes), 8))

# %% [markdown]
# A utility-induced preference is complete and transitive by construction, so
# the checker finds nothing to report.

# %%
print("transitivity violations:", check_transitivity(routes, utility_comparator()))
