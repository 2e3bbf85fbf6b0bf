# %% [markdown]
# # Codes used by the commitment
#
# Three families: repetition (`rep<m>`), Hamming(7,4) (`ham74`) and their
# concatenation (`ham74+rep<m>`). `Codec.fit` picks the largest message
# that fits a given template length.

# %%
import numpy as np

from rofc import Codec

for name in ("rep3", "ham74", "ham74+rep3", "ham74+rep5"):
    c = Codec.fit(name, 200)
    print(f"{name:12s} k={c.k:3d} n={c.n:3d} always corrects {c.radius} errors")

# %% Hamming(7,4): every single-bit error is located by its syndrome
ham = Codec.parse("ham74", 4)
word = ham.encode([1, 0, 1, 1])
print("codeword:", word)
for pos in range(7):
    noisy = word.copy()
    noisy[pos] ^= 1
    msg, corrected = ham.decode(noisy)
    print(f"flip bit {pos}: decoded {msg}, corrected {corrected}")

# %% Concatenated code: one inner group per Hamming block may be lost entirely
c = Codec.parse("ham74+rep3", 4)
msg = np.array([0, 1, 1, 0], np.uint8)
noisy = c.encode(msg)
noisy[0:3] ^= 1      # whole first group wrong
noisy[4] ^= 1        # one bit in the second group
noisy[20] ^= 1       # one bit in the last group
print("recovered:", c.decode(noisy))
