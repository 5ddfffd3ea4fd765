#!/usr/bin/env python3
"""Compile the flat emotion word list from seven seed emotions and their synonyms.

Usage: compile_emotion_lexicon.py [--out resources/lexicons/emotion.txt]

The synonym sets below were collected by hand from a general-purpose
thesaurus. Output is one lowercase entry per line, sorted, deduplicated.
"""

import argparse
import pathlib

SEEDS = {
    "anger": [
        "anger", "angry", "angered", "rage", "raging", "enraged", "furious", "fury",
        "irate", "livid", "mad", "outraged", "outrage", "wrath", "wrathful", "annoyed",
        "irritated", "indignant", "incensed", "infuriated", "hostile", "resentful",
        "resentment", "seething", "fuming",
    ],
    "embarrassment": [
        "embarrassment", "embarrassed", "embarrassing", "ashamed", "shame", "shameful",
        "humiliated", "humiliation", "humiliating", "mortified", "awkward", "sheepish",
        "abashed", "chagrin", "cringe", "cringey", "self-conscious",
    ],
    "empathy": [
        "empathy", "empathize", "empathise", "sympathy", "sympathize", "compassion",
        "compassionate", "understanding", "caring", "kindness", "pity", "condolences",
        "feel for you", "tenderness", "warmth",
    ],
    "fear": [
        "fear", "afraid", "scared", "frightened", "terrified", "terror", "panic",
        "anxious", "anxiety", "dread", "fearful", "horror", "horrified", "nervous",
        "alarmed", "worried", "worry", "spooked", "petrified",
    ],
    "pride": [
        "pride", "proud", "arrogant", "arrogance", "conceited", "smug", "vain",
        "vanity", "boastful", "dignity", "self-esteem", "triumphant", "haughty",
        "honored", "honoured",
    ],
    "relief": [
        "relief", "relieved", "reassured", "comforted", "at ease", "phew", "soothed",
        "eased", "thankful", "calm", "calmed",
    ],
    "sadness": [
        "sadness", "sad", "sorrow", "sorrowful", "grief", "grieving", "unhappy",
        "depressed", "depression", "miserable", "misery", "gloomy", "heartbroken",
        "melancholy", "despair", "upset", "crying", "tears", "mournful", "lonely",
    ],
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = pathlib.Path(__file__).resolve().parent.parent / "resources" / "lexicons" / "emotion.txt"
    parser.add_argument("--out", type=pathlib.Path, default=default)
    args = parser.parse_args()

    words = sorted({w.strip().lower() for group in SEEDS.values() for w in group if w.strip()})
    lines = ["# Emotion synsets: " + ", ".join(SEEDS) + ".",
             "# Generated by tools/compile_emotion_lexicon.py; edit the script, not this file."]
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(lines + words) + "\n", encoding="utf-8")
    print(f"wrote {len(words)} entries to {args.out}")


if __name__ == "__main__":
    main()
