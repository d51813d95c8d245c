"""Regenerate the bundled synthetic tweet corpus.

The corpus is synthetic: screen names, ids and counts are random, drawn so
that the aggregates reproduce the published ones exactly (884 tweets, 478
originals, 100 of them retweeted, friend counts of original tweeters summing
to 275960).

    python scripts/make_sample_corpus.py [output.csv]
"""

import csv
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

TOTAL = 884
ORIGINALS = 478
RETWEETED = 100
FRIENDS_SUM = 275960
TWEETERS = 410
SEED = 20130706


def friend_counts(rng, n, total):
    raw = rng.pareto(1.5, n) + 1.0
    counts = np.floor(raw / raw.sum() * total).astype(int)
    counts = np.maximum(counts, 1)
    diff = total - counts.sum()
    order = np.argsort(-counts)
    i = 0
    while diff != 0:
        j = order[i % n]
        if diff > 0:
            counts[j] += 1
            diff -= 1
        elif counts[j] > 1:
            counts[j] -= 1
            diff += 1
        i += 1
    return counts


def build(rng):
    start = datetime(2013, 7, 6, tzinfo=timezone.utc)
    window = timedelta(days=5).total_seconds()
    names = [f"user{i:04d}" for i in range(TWEETERS)]
    friends = dict(zip(names, friend_counts(rng, TWEETERS, FRIENDS_SUM).tolist()))
    authors = names + rng.choice(names, ORIGINALS - TWEETERS).tolist()
    rng.shuffle(authors)

    rows = []
    originals = []
    for i, author in enumerate(authors):
        ts = start + timedelta(seconds=float(rng.uniform(0, window * 0.8)))
        tid = f"o{i:05d}"
        originals.append((tid, ts))
        rows.append([tid, ts, author, int(rng.integers(0, 5000)), friends[author], "false", ""])

    n_rt = TOTAL - ORIGINALS
    picked = rng.choice(ORIGINALS, RETWEETED, replace=False)
    # every picked original gets one retweet, the rest follow a skewed split
    extra = rng.multinomial(n_rt - RETWEETED, rng.dirichlet(np.full(RETWEETED, 0.3)))
    j = 0
    for idx, more in zip(picked.tolist(), extra.tolist()):
        oid, ots = originals[idx]
        for _ in range(1 + more):
            ts = ots + timedelta(seconds=float(rng.exponential(3600)))
            rows.append([f"r{j:05d}", ts, f"rt{j:04d}", int(rng.integers(0, 3000)),
                         int(rng.integers(0, 2000)), "true", oid])
            j += 1
    rows.sort(key=lambda r: (r[1], r[0]))
    for r in rows:
        r[1] = r[1].strftime("%Y-%m-%dT%H:%M:%SZ")
    return rows


def main(argv):
    out = Path(argv[0]) if argv else Path(__file__).resolve().parents[1] / "src/offspread/data/sample_corpus.csv"
    rows = build(np.random.default_rng(SEED))
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tweet_id", "created_at", "screen_name", "follower_count", "friend_count", "is_retweet", "original_id"])
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main(sys.argv[1:])
