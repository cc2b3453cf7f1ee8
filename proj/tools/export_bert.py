#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Write a Hugging Face BERT checkpoint as an apirec tensor archive.

The archive keeps the published tensor names; `apirec train` maps them onto
its encoder layout when `pretrained_encoder` points at the file.

    python3 tools/export_bert.py prajjwal1/bert-tiny bert-tiny.ckpt --vocab-out vocab.txt
"""

import argparse
import json
import os
import shutil
import sys
import tempfile

import numpy as np

MAGIC = b"APIRECKPT 1"


def write_archive(tensors, path):
    """Write {name: array} in name order, as the C++ writer does."""
    entries, blobs, offset = [], [], 0
    for name in sorted(tensors):
        data = np.ascontiguousarray(tensors[name], dtype="<f4")
        entries.append({"name": name, "shape": list(data.shape), "offset": offset})
        blobs.append(data.tobytes())
        offset += data.nbytes
    header = {"data_bytes": offset, "dtype": "f32le", "tensors": entries}
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".export-")
    try:
        with os.fdopen(fd, "wb") as out:
            out.write(MAGIC + b"\n")
            out.write(json.dumps(header, separators=(",", ":"), sort_keys=True).encode() + b"\n")
            for blob in blobs:
                out.write(blob)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def read_archive(path):
    with open(path, "rb") as f:
        raw = f.read()
    magic, rest = raw.split(b"\n", 1)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a checkpoint archive")
    header_line, data = rest.split(b"\n", 1)
    header = json.loads(header_line)
    out = {}
    for entry in header["tensors"]:
        count = int(np.prod(entry["shape"], dtype=np.int64))
        out[entry["name"]] = np.frombuffer(
            data, dtype="<f4", count=count, offset=entry["offset"]
        ).reshape(entry["shape"])
    return out


def bert_tensors(model):
    return {
        name: t.detach().cpu().float().numpy()
        for name, t in model.state_dict().items()
        if t.is_floating_point()
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("model", help="hub id or local directory")
    parser.add_argument("output", help="archive to write")
    parser.add_argument("--vocab-out", help="also copy the WordPiece vocabulary here")
    args = parser.parse_args(argv)

    from transformers import AutoTokenizer, BertModel

    model = BertModel.from_pretrained(args.model)
    tensors = bert_tensors(model)
    write_archive(tensors, args.output)
    print(
        f"{args.output}: {len(tensors)} tensors, "
        f"{model.config.num_hidden_layers} layers, hidden {model.config.hidden_size}, "
        f"heads {model.config.num_attention_heads}"
    )
    if args.vocab_out:
        tokenizer = AutoTokenizer.from_pretrained(args.model)
        with tempfile.TemporaryDirectory() as tmp:
            shutil.copy(tokenizer.save_vocabulary(tmp)[0], args.vocab_out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
