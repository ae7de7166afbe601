"""Unbalanced-disc study: nonlinear truth, LPV embedding and four model structures.

Run: python3 demos/unbalanced_disc.py [output-directory]
"""

import sys

import numpy as np

from lpvkit.bench import ExperimentConfig, UnbalancedDiscParams, embed_lpv, run_experiment
from lpvkit.models import frozen_poles

d = UnbalancedDiscParams()
m = embed_lpv(d)
for p in (0.0, 1.0):
    print(f"frozen poles at p={p:g}:", np.round(frozen_poles(m, [p]), 6), "|z| =", np.round(np.abs(frozen_poles(m, [p])), 6))

out = sys.argv[1] if len(sys.argv) > 1 else "unbalanced_disc_out"
rep = run_experiment(ExperimentConfig(), out)
print(f"embedding BFR on estimation data: {rep.embedding_bfr:.1f} %")
print("validation BFR [%]")
print("SNR dB " + " ".join(f"{k.upper():>7s}" for k in rep.bfr))
for i, s in enumerate(rep.config.snr_list_db):
    print(f"{s:6g} " + " ".join(f"{rep.bfr[k][i]:7.1f}" for k in rep.bfr))
print("files:", ", ".join(str(f) for f in rep.files.values()))
