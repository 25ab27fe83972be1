#!/usr/bin/env python3
# Copyright 2026 The kgar Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Convert an RDF graph plus train/test label tables into a kgar dataset directory.

Every RDF term becomes an entity named by its N3 form, literals included.
Triples are written sorted so the output is byte-identical across runs.
"""

import argparse
import csv
import pathlib
import sys

import rdflib


def term_name(term):
    name = term.n3()
    return name.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def read_labels(path, entity_col, label_col):
    with open(path, newline="") as f:
        rows = list(csv.reader(f, delimiter="\t"))
    header, body = rows[0], rows[1:]
    e = header.index(entity_col) if entity_col in header else int(entity_col)
    k = header.index(label_col) if label_col in header else int(label_col)
    return [(row[e], row[k]) for row in body if row]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rdf", required=True, help="RDF file (any format rdflib can guess)")
    ap.add_argument("--train-labels", required=True)
    ap.add_argument("--test-labels", required=True)
    ap.add_argument("--entity-column", default="0", help="header name or index of the entity URI column")
    ap.add_argument("--label-column", default="-1", help="header name or index of the class column")
    ap.add_argument("--drop", action="append", default=[], help="relation URI listed in dataset.conf drop_relations")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="extra dataset.conf setting")
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    g = rdflib.Graph()
    g.parse(args.rdf)
    lines = sorted({f"{term_name(s)}\t{term_name(p)}\t{term_name(o)}" for s, p, o in g})
    (out / "train.tsv").write_text("\n".join(lines) + "\n")

    for split, path in (("labels_train.tsv", args.train_labels), ("labels_test.tsv", args.test_labels)):
        pairs = read_labels(path, args.entity_column, args.label_column)
        text = "".join(f"{term_name(rdflib.URIRef(e))}\t{label}\n" for e, label in pairs)
        (out / split).write_text(text)

    conf = ["task = classify"]
    if args.drop:
        conf.append("drop_relations = " + ",".join(term_name(rdflib.URIRef(d)) for d in args.drop))
    conf += [kv.replace("=", " = ", 1) for kv in args.set]
    (out / "dataset.conf").write_text("\n".join(conf) + "\n")
    print(f"{out}: {len(lines)} triples", file=sys.stderr)


if __name__ == "__main__":
    main()
