# %% [markdown]
# # A simulated session
#
# Alice draws random bits, Bob receives them through a binary symmetric
# channel, and the two run the full protocol: shared permutations, parity
# rounds, verification by a 64-bit subset hash, and privacy amplification.

# %%
from qkdrecon.bitcore import SeededGenerator, Stream, generate_random_bits, hamming_distance
from qkdrecon.messages import decode
from qkdrecon.protocol import SessionConfig, run_session
from qkdrecon.simchannel import monte_carlo, transmit_bsc

# %%
n, p, seed = 10**6, 0.25, 1
alice = generate_random_bits(SeededGenerator(seed, Stream.SOURCE), n)
bob = transmit_bsc(alice, p, SeededGenerator(seed, Stream.CHANNEL))
print("errors on the channel:", hamming_distance(alice, bob))

# %%
transcript = []
out = run_session(alice, bob, SessionConfig(n0=n, p0=p, shared_seed=seed), transcript)
for r in out.rounds:
    print(f"b={r.b:3d}  n={r.n_before:8d}  errors={r.errors_before:7d}  bad={r.bad_blocks:7d}  new n={r.n_after}")
print("status:", out.status.value, " agreed bits:", out.n_agreed, " delta:", out.delta, " key:", len(out.key))
print("keys equal:", out.key == out.bob_key)

# %% [markdown]
# Everything that crossed the public channel is in the transcript, as bytes.

# %%
print("messages:", len(transcript), " bytes:", sum(len(raw) for _, raw in transcript))
print("first message:", decode(transcript[0][1]).__class__.__name__)

# %% [markdown]
# A handful of seeds, to compare against the forecast of about 99642 bits.

# %%
summary = monte_carlo(SessionConfig(n0=n, p0=p), trials=5, base_seed=1)
print("success rate:", summary.success_rate, " mean final n:", round(summary.mean_final_n))
