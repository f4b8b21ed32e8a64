# %% [markdown]
# # Forecasting a run from expected counts
#
# The predictor chains rounds using expected values only, which is enough to
# see how many bits survive reconciliation before any simulation is run.

# %%
from qkdrecon.cli import predict_table
from qkdrecon.predictor import predict_run

# %% [markdown]
# A million bits at a 25% error rate. Five rounds clear the errors.

# %%
print(predict_table(0.25, 10**6).to_markdown())

# %% [markdown]
# Final string length over a range of error rates. Near ``p = 1/2`` almost
# nothing is left.

# %%
for p in (0.0001, 0.001, 0.01, 0.1, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.48, 0.49):
    run = predict_run(p, 10**6)
    print(f"p={p:<6}  rounds={run.rounds:2d}  final n={run.final_n:10.1f}")
