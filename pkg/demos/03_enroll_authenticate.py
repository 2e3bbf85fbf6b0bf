# %% [markdown]
# # Enrollment, authentication and revocation
#
# The device keeps only the projection seed. The server keeps helper data
# (`encode(K) XOR template`) and `hash(K)`. Authentication rebuilds the
# template from a fresh sample, decodes a candidate key and compares
# digests.

# %%
import tempfile
from pathlib import Path

import numpy as np

from rofc import Codec, RecordStore, authenticate, enroll, generate_key, new_seed

rng = np.random.default_rng(1)
codec = Codec.fit("ham74+rep3", 200)
alice = rng.random(200)

device, server = enroll("alice", alice, new_seed(), generate_key(codec.k), codec)
print("server record:", server.helper.codec, "truncated to", server.truncation_len, "bits")

# %% Same sample, a slightly noisy sample, someone else
print("replay  :", authenticate(alice, device, server))
noisy = np.clip(alice + rng.normal(0, 0.01, 200), 0, 1)
print("noisy   :", authenticate(noisy, device, server))
print("impostor:", authenticate(rng.random(200), device, server))

# %% Revoke: new seed and key, the old device secret stops working
store = RecordStore([server])
new_device, new_server = enroll("alice", alice, new_seed(), generate_key(codec.k), codec)
store.put_server(new_server)
print("old device vs new record:", authenticate(alice, device, store.server("alice")).accepted)
print("new device vs new record:", authenticate(alice, new_device, store.server("alice")).accepted)
print("superseded record flagged revoked:", store.records[0].revoked)

# %% Records persist in a small binary format
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "server.bin"
    store.save(path)
    print(path.stat().st_size, "bytes; reload equal:", RecordStore.open(path).records == store.records)
