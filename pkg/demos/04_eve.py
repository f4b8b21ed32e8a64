# %% [markdown]
# # How much does Eve know?
#
# Every disclosed parity can teach Eve something. Starting from a fraction
# ``p_e`` of bits she knows, the forecast tracks her share round by round
# and reports the advantage, the expected number of agreed bits she does not
# know.

# %%
from qkdrecon.analysis import EveParams, eve_update_case1, estimate_pe_from_error_rate
from qkdrecon.cli import predict_table, sweep_table

# %%
print(predict_table(0.15, 10**6, pe=0.25).to_markdown())

# %% [markdown]
# While Eve only knows single bits, a round never lifts her unknown share
# above the square of what it was.

# %%
for pe in (0.1, 0.25, 0.5):
    print(pe, [round(1 - float(eve_update_case1(pe, b)), 4) for b in (2, 3, 8)], round((1 - pe) ** 2, 4))

# %% [markdown]
# Advantage over a grid of error rates and initial Eve knowledge. A dash
# marks fewer than 64 bits.

# %%
print(sweep_table([0.1, 0.2, 0.3, 0.4], pes=[0.0, 0.1, 0.2, 0.3]).to_markdown())
print(sweep_table([0.001, 0.01, 0.1, 0.2], ratios=[2, 3, 4, 5]).to_markdown())

# %% [markdown]
# Without other information, the error rate alone bounds Eve's share.

# %%
for p in (0.01, 0.05, 0.1):
    print(p, round(estimate_pe_from_error_rate(p), 4))
