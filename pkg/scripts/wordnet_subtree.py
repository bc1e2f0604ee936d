"""Write the direct is-a edges of a WordNet noun subtree as ``child<TAB>parent``.

Hypernym and instance-hypernym links are both followed.  Needs ``nltk`` and
a WordNet 3.0 dictionary directory (``data.noun`` and friends).

    python scripts/wordnet_subtree.py WORDNET_DIR animal.n.01 > animals.tsv
"""

import argparse
import sys

from nltk.corpus.reader.wordnet import WordNetCorpusReader


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("wordnet_dir")
    ap.add_argument("root", help="synset name, e.g. animal.n.01")
    args = ap.parse_args(argv)

    wn = WordNetCorpusReader(args.wordnet_dir, None)
    root = wn.synset(args.root)
    members = {root}
    stack = [root]
    while stack:
        s = stack.pop()
        for c in s.hyponyms() + s.instance_hyponyms():
            if c not in members:
                members.add(c)
                stack.append(c)
    edges = sorted(
        (s.name(), p.name())
        for s in members
        for p in s.hypernyms() + s.instance_hypernyms()
        if p in members
    )
    for child, parent in edges:
        sys.stdout.write(f"{child}\t{parent}\n")


if __name__ == "__main__":
    main()
