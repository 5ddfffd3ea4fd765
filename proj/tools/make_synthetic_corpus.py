#!/usr/bin/env python3
"""Generate the bundled synthetic corpus.

Writes, under data/synthetic/:
  dump.jsonl           reddit-style comment dump (t1_/t3_ fullnames)
  annotations.jsonl    annotator a1 on every snippet, a2 on the first 20
  adjudications.jsonl  resolutions for the two planted a1/a2 disagreements
  frames.jsonl         frame-only sidecar records
and resources/embeddings/synthetic-50d.txt, a toy embedding table whose
cue words cluster by category.

Labels are planted so lexical cues (swearing, harmful words, emoticons,
politeness, anger words, ...) correlate with each class. Output is fully
determined by --seed.
"""

import argparse
import json
import pathlib
import random
import re

ROOT = pathlib.Path(__file__).resolve().parent.parent

SWEAR = ["damn", "shit", "crap", "bastard", "moron", "jackass", "bullshit", "dumbass"]
HARMFUL = ["cancer", "die", "kill", "death", "suffer", "poison", "drown", "stab"]
EMOTICONS = [":)", ":D", ":P", ";)", "xD", "^_^", "<3", ":-)"]
POLITE = ["please", "thanks", "thank you", "could you", "would you mind", "appreciate", "cheers", "sorry"]
ANGER = ["furious", "angry", "outraged", "livid", "enraged", "irritated"]
PRAISE = ["brilliant", "genius", "masterful", "legendary", "impressive", "clever"]
NEUTRAL = ["ignore", "whatever", "moving", "unfeed", "mute", "block"]
FRUSTRATE = ["boring", "weak", "pathetic", "yawn", "predictable", "lame"]
TOPICS = ["game", "movie", "election", "pizza", "cats", "football", "weather", "phone", "music", "taxes",
          "coffee", "bikes", "books", "traffic", "garden", "server", "dogs", "recipe", "camera", "school"]
FILLER = ["honestly", "really", "today", "again", "here", "people", "thread", "point", "post", "guys",
          "this", "that", "about", "thing", "anyway", "look", "idea", "time", "world", "news"]
TRIGGERS = ["troll", "trolls", "Troll", "TROLL", "trol", "trolls", "troll"]
NAMES = ["quietfox", "bluebird", "maplejam", "riverstone", "ottertail", "sunnyday", "paperkite", "northwind",
         "greenleaf", "nightowl", "stormcloud", "pebble", "copperpot", "lanternfish", "wildberry", "oakbarrel"]
SWEAR_NAMES = ["damn_dave", "shitposter", "crapmaster", "bastardo", "jackass_jim", "mr_bullshit"]

DELETED = "[deleted]"


class Dump:
    def __init__(self, rng):
        self.rng = rng
        self.records = []
        self.clock = 1_500_000_000
        self.next_id = 0
        self.frames = []

    def comment(self, thread, parent, body, author, frames=None):
        self.next_id += 1
        self.clock += self.rng.randint(5, 90)
        cid = f"c{self.next_id:04d}"
        self.records.append({
            "id": cid,
            "parent_id": parent if parent.startswith("t3_") else "t1_" + parent,
            "link_id": "t3_" + thread,
            "author": author,
            "body": body,
            "created_utc": self.clock,
        })
        if frames:
            self.frames.append({"id": cid, "frames": frames})
        return cid


def pick(rng, seq, k=1):
    return rng.sample(seq, k) if k > 1 else rng.choice(seq)


def filler(rng, n):
    return " ".join(rng.choice(FILLER) for _ in range(n))


def attempt_text(rng, intention, disclosure, topic):
    if intention == "Trolling" and disclosure == "Exposed":
        s1, s2 = pick(rng, SWEAR, 2)
        text = f"Anyone who likes {topic} is a {s1} {s2}, {filler(rng, 2)}."
        frames = [{"name": "Judgment_direct_address", "target": s1, "arguments": [{"name": "Addressee", "text": "Anyone"}]}]
    elif intention == "Trolling":
        h = pick(rng, HARMFUL)
        text = f"I hope the {topic} fans {h} slowly, {filler(rng, 2)}."
        frames = [{"name": "Killing", "target": h, "arguments": [{"name": "Victim", "text": f"{topic} fans"}]}]
    elif intention == "Playing" and disclosure == "Exposed":
        e = pick(rng, EMOTICONS)
        text = f"lol {topic} is secretly run by cats {e} just kidding {filler(rng, 1)}"
        frames = []
    elif intention == "Playing":
        e = pick(rng, EMOTICONS)
        text = f"haha obviously the {topic} is flat {e} {filler(rng, 2)}"
        frames = []
    else:
        p = pick(rng, POLITE)
        text = f"{p.capitalize()}, can someone explain the {topic} rules? {filler(rng, 2)}."
        frames = [{"name": "Request", "target": p.split()[0], "arguments": [{"name": "Message", "text": f"the {topic} rules"}]}]
    return text, frames


def response_text(rng, interpretation, strategy, trigger):
    t = trigger if trigger else pick(rng, FILLER)
    if strategy == "Engage":
        text = f"I am {pick(rng, ANGER)} about this, you {t}, {filler(rng, 1)}"
    elif strategy == "Troll":
        s1, s2 = pick(rng, SWEAR, 2)
        text = f"Go away {t}, you {s1} {s2}"
    elif strategy == "Frustrate":
        text = f"{pick(rng, FRUSTRATE).capitalize()} {t}, {pick(rng, FRUSTRATE)} attempt"
    elif strategy == "Neutralize":
        text = f"{pick(rng, NEUTRAL).capitalize()} the {t}, {pick(rng, NEUTRAL)} and move on"
    elif strategy == "Praise":
        text = f"{pick(rng, PRAISE).capitalize()} {t} work, truly {pick(rng, PRAISE)}"
    elif strategy == "Follow":
        text = f"lol {pick(rng, EMOTICONS)} this {t} gets it {pick(rng, EMOTICONS)}"
    else:  # Normal
        text = f"{pick(rng, POLITE).capitalize()}, I do not think you are a {t}, {filler(rng, 1)}"
    if interpretation == "Playing" and strategy == "Praise":
        text += " haha"
    return text


# (intention, disclosure) schedule: 28 Trolling, 12 Playing, 20 NoTrolling
ATTEMPTS = ([("Trolling", "Exposed")] * 14 + [("Trolling", "Hidden")] * 14 + [("Playing", "Exposed")] * 8 +
            [("Playing", "Hidden")] * 4 + [("NoTrolling", "None")] * 20)

# response label choices conditioned on the attempt's intention
RESPONSES = {
    "Trolling": [("Trolling", "Engage")] * 4 + [("Trolling", "Troll")] * 3 + [("Trolling", "Frustrate")] * 2 +
                [("Trolling", "Neutralize")] * 2 + [("Trolling", "Praise")],
    "Playing": [("Playing", "Follow")] * 3 + [("Playing", "Praise")] * 2 + [("Trolling", "Engage")],
    "NoTrolling": [("NoTrolling", "Normal")] * 4 + [("NoTrolling", "Engage")] + [("Trolling", "Neutralize")],
}


def build(seed):
    rng = random.Random(seed)
    dump = Dump(rng)
    schedule = ATTEMPTS[:]
    rng.shuffle(schedule)
    gold = []  # (attempt id, AttemptLabel, [(response id, R, B)])
    per_thread = 5
    for t in range(len(schedule) // per_thread):
        thread = f"th{t + 1:02d}"
        topic = TOPICS[t % len(TOPICS)]
        op = "t3_" + thread
        for k in range(per_thread):
            intention, disclosure = schedule[t * per_thread + k]
            # context: usually a parent comment; every sixth attempt is top-level,
            # every ninth has a deleted parent
            idx = t * per_thread + k
            if idx % 6 == 5:
                parent = op
            else:
                ctx_body = DELETED if idx % 9 == 4 else f"What do you all think about the {topic}? {filler(rng, 3)}"
                parent = dump.comment(thread, op, ctx_body, pick(rng, NAMES))
            body, frames = attempt_text(rng, intention, disclosure, topic)
            author = pick(rng, SWEAR_NAMES) if intention == "Trolling" and rng.random() < 0.5 else pick(rng, NAMES)
            aid = dump.comment(thread, parent, body, author, frames)
            n = rng.choice([1, 2, 2, 3])
            responses = []
            for r in range(n):
                interp, strategy = pick(rng, RESPONSES[intention])
                trigger = pick(rng, TRIGGERS) if r == 0 or rng.random() < 0.5 else None
                rauthor = pick(rng, SWEAR_NAMES) if strategy == "Troll" and rng.random() < 0.5 else pick(rng, NAMES)
                rid = dump.comment(thread, aid, response_text(rng, interp, strategy, trigger), rauthor)
                responses.append((rid, interp, strategy))
            if idx % 7 == 3:
                # a deleted reply that would otherwise be a response
                dump.comment(thread, aid, DELETED, "[deleted]")
            gold.append((aid, {"intention": intention, "disclosure": disclosure}, responses))

        # decoys: a reply that only says "trolling", a suspect under a deleted
        # attempt, and an orphan whose parent is missing from the dump
        d1 = dump.comment(thread, op, f"Random {topic} chatter {filler(rng, 3)}", pick(rng, NAMES))
        dump.comment(thread, d1, "stop trolling everyone please", pick(rng, NAMES))
        d2 = dump.comment(thread, op, DELETED, "[deleted]")
        dump.comment(thread, d2, "that troll deleted everything", pick(rng, NAMES))
        dump.comment(thread, "missing" + thread, f"replying to a vanished comment about {topic}", pick(rng, NAMES))
    return dump, gold


def annotations(gold, rng):
    out, adjudications = [], []
    stamp = "2018-05-01T12:00:00Z"

    def record(annotator, aid, attempt, responses):
        return {
            "snippet_id": aid, "annotator_id": annotator, "discarded": False, "attempt": attempt,
            "responses": [{"response_id": rid, "interpretation": r, "strategy": b} for rid, r, b in responses],
            "submitted_at": stamp, "phase": "production",
        }

    for aid, attempt, responses in gold:
        out.append(record("a1", aid, attempt, responses))
    planted_i = planted_b = False
    for aid, attempt, responses in gold[:20]:
        a2_attempt, a2_responses = dict(attempt), list(responses)
        if not planted_i and attempt["intention"] == "Trolling" and attempt["disclosure"] == "Exposed":
            a2_attempt["intention"] = "Playing"
            adjudications.append({"item_id": aid, "aspect": "I", "label": "Trolling", "resolver_id": "adj",
                                  "submitted_at": stamp})
            planted_i = True
        elif not planted_b and responses[0][2] == "Engage" and responses[0][1] == "Trolling":
            rid, r, _ = responses[0]
            a2_responses[0] = (rid, r, "Troll")
            adjudications.append({"item_id": f"{aid}/{rid}", "aspect": "B", "label": "Engage",
                                  "resolver_id": "adj", "submitted_at": stamp})
            planted_b = True
        out.append(record("a2", aid, a2_attempt, a2_responses))
    assert planted_i and planted_b, "schedule did not allow both planted disagreements"
    return out, adjudications


CATEGORIES = {
    "swear": SWEAR, "harmful": HARMFUL, "emoticon": EMOTICONS + ["lol", "haha"], "polite": POLITE,
    "anger": ANGER, "praise": PRAISE, "neutral": NEUTRAL, "frustrate": FRUSTRATE,
}


def embeddings(records, rng, dim=50):
    vocab = set()
    for rec in records:
        for tok in re.findall(r"[A-Za-z]+|\S", rec["body"]):
            vocab.add(tok.lower())
    for words in CATEGORIES.values():
        for w in words:
            vocab.update(w.lower().split())
    centroids = {c: [rng.gauss(0, 1) for _ in range(dim)] for c in CATEGORIES}
    member = {}
    for c, words in CATEGORIES.items():
        for w in words:
            for part in w.lower().split():
                member.setdefault(part, c)
    lines = []
    for w in sorted(vocab):
        if w in member:
            base = centroids[member[w]]
            vec = [b + rng.gauss(0, 0.3) for b in base]
        else:
            vec = [rng.gauss(0, 0.4) for _ in range(dim)]
        lines.append(w + " " + " ".join(f"{x:.4f}" for x in vec))
    return lines


def main():
    parser = argparse.ArgumentParser(description="Generate the bundled synthetic corpus.")
    parser.add_argument("--seed", type=int, default=2018)
    parser.add_argument("--out", type=pathlib.Path, default=ROOT / "data" / "synthetic")
    parser.add_argument("--embeddings", type=pathlib.Path,
                        default=ROOT / "resources" / "embeddings" / "synthetic-50d.txt")
    args = parser.parse_args()

    dump, gold = build(args.seed)
    anns, adjs = annotations(gold, random.Random(args.seed + 1))
    args.out.mkdir(parents=True, exist_ok=True)

    def write_jsonl(path, rows):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for row in rows:
                f.write(json.dumps(row, ensure_ascii=False) + "\n")

    write_jsonl(args.out / "dump.jsonl", dump.records)
    write_jsonl(args.out / "annotations.jsonl", anns)
    write_jsonl(args.out / "adjudications.jsonl", adjs)
    write_jsonl(args.out / "frames.jsonl", dump.frames)
    args.embeddings.parent.mkdir(parents=True, exist_ok=True)
    args.embeddings.write_text("\n".join(embeddings(dump.records, random.Random(args.seed + 2))) + "\n",
                               encoding="utf-8")
    print(f"{len(dump.records)} comments, {len(gold)} snippets, {len(anns)} annotations, {len(adjs)} adjudications")


if __name__ == "__main__":
    main()
