#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Random Hugging Face BERT exported with tools/export_bert.py, plus its outputs.

Regenerate with `python3 tests/golden/make_bert_reference.py` (needs torch and
transformers); writes bert.ckpt and bert_expected.json next to this file.
"""

import json
import os
import sys

import torch
import transformers

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(HERE, "..", "..", "tools"))
import export_bert  # noqa: E402


def main():
    torch.manual_seed(11)
    config = transformers.BertConfig(
        vocab_size=40, hidden_size=16, num_hidden_layers=2, num_attention_heads=4,
        intermediate_size=32, max_position_embeddings=24, hidden_dropout_prob=0.0,
        attention_probs_dropout_prob=0.0,
    )
    model = transformers.BertModel(config).eval()
    # Default initialization leaves biases and norms trivial.
    with torch.no_grad():
        for p in model.parameters():
            p.add_(0.1 * torch.randn_like(p))
    export_bert.write_archive(export_bert.bert_tensors(model), os.path.join(HERE, "bert.ckpt"))

    ids = [2, 17, 5, 33, 9, 3, 21, 8, 3, 0, 0]
    segments = [0, 0, 0, 0, 0, 0, 1, 1, 1, 0, 0]
    mask = [1] * 9 + [0] * 2
    with torch.no_grad():
        out = model(
            input_ids=torch.tensor([ids]),
            token_type_ids=torch.tensor([segments]),
            attention_mask=torch.tensor([mask]),
        )
    expected = {
        "heads": config.num_attention_heads,
        "ids": ids,
        "segments": segments,
        "mask": mask,
        "hidden": out.last_hidden_state[0, : sum(mask)].tolist(),
        "pooler": out.pooler_output[0].tolist(),
    }
    with open(os.path.join(HERE, "bert_expected.json"), "w") as f:
        json.dump(expected, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
