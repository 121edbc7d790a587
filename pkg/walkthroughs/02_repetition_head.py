"""
The repetition head on a hand-made context
==========================================

    python walkthroughs/02_repetition_head.py

No training here: we set the head's matrices by hand to see how the
pointer, the repeat decision and the final mixture fit together.
"""

# %%
import numpy as np

from repcomplete.models import ContextStates, RepParams, mix_distributions, rep_argmax, rep_decision, rep_pointer_probs

np.set_printoptions(precision=3, suppress=True)

# Three earlier identifiers with 4-dimensional hidden states, plus the
# state at the point where the next identifier is to be predicted.
states = np.array([
    [1.0, 0.0, 0.0, 0.0],   # "count"
    [0.0, 1.0, 0.0, 0.0],   # "limit"
    [0.0, 0.0, 1.0, 0.0],   # "count" again
])
h_next = np.array([0.2, 0.1, 0.9, 0.0])
ctx = ContextStates(states, h_next, [("count", 3), ("limit", 7), ("count", 12)])

# %%
# With W = I the pointer score is the dot product h_k . h_next.
params = RepParams(W=np.eye(4) * 3, V1=np.eye(4) * 2, V2=np.zeros((4, 4)))
pointer = rep_pointer_probs(ctx, params)
print("pointer over context:", pointer)

mk = rep_argmax(pointer)
print("most likely source:", ctx.texts[mk])

# %%
# The decision compares two bilinear scores of h_mk against h_next.
p_rep = rep_decision(ctx, mk, params)
print(f"P(repeat) = {p_rep:.3f}")

# %%
# The language model knows a small closed vocabulary. Its guesses are
# scaled by 1 - P(repeat); pointer mass is added per string, so the two
# "count" entries merge into one candidate.
vocab = ["<unk>", "i", "count", "size"]
lm = np.array([0.4, 0.3, 0.1, 0.2])
for token, p in mix_distributions(lm, vocab, pointer, p_rep, ctx.texts):
    print(f"{token:>6} {p:.3f}")

# %%
# A closed gate falls back to the language model exactly.
print(mix_distributions(lm, vocab, pointer, 0.0, ctx.texts)[:3])
