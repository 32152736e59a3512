"""Synthetic benchmark world used by the acceptance tests.

The generated language has three kinds of structure, each exercising a
different part of the correction stack:

* hub words: short, very frequent, never mistyped in the training corpora
  (frequent function words rarely are), so triple mining stays clean while
  the hubs still dominate bigram contexts;
* child pairs: per hub, a frequent child ``c1`` one edit from the hub and a
  rarer child ``c2`` one further edit away.  Both children share one
  successor menu, so the right-hand context cannot separate them and a
  corrupted ``c2`` becomes a genuine discrimination test: the prior favours
  ``c1`` while the channel favours the one-edit truth ``c2``;
* twin pairs: vocabulary words one primary-confusion edit apart with
  disjoint successor menus.  Corrupting one yields a real-word error that
  only the language model can repair.

Corruption follows a concentrated confusion table (one primary and one
secondary target per character) applied per token, mirroring how typing
errors cluster on a few neighbouring keys.
"""

import random

from spellchannel.channel import extract_triples, train_confusion
from spellchannel.corpus import ingest
from spellchannel.corrector import CandidateIndex, CorrectionModels
from spellchannel.langmodel import train_kn
from spellchannel.noiser import build_eval_dataset, calibrate_rate_scale
from spellchannel.profiles import LATIN
from spellchannel.textcore import dl_distance

ALPHABET = "abcdefghijklmnop"


def make_confusion_tables(seed):
    """Per-character substitution targets (0.72/0.25 concentrated) and a
    uniform insertion distribution."""
    rng = random.Random(seed)
    subs = {}
    for c in ALPHABET:
        others = [x for x in ALPHABET if x != c]
        rng.shuffle(others)
        dist = {others[0]: 0.72, others[1]: 0.25}
        for x in others[2:]:
            dist[x] = 0.03 / len(others[2:])
        subs[c] = dist
    ins = {c: 1.0 / len(ALPHABET) for c in ALPHABET}
    return subs, ins


def corrupt_word(word, subs, ins, rng, p_sub=0.84, p_del=0.10):
    """Apply exactly one edit at a uniformly chosen position."""
    i = rng.randrange(len(word))
    r = rng.random()
    if r < p_sub:
        c = word[i]
        targets = sorted(subs[c])
        t = rng.choices(targets, weights=[subs[c][x] for x in targets])[0]
        return word[:i] + t + word[i + 1 :]
    if r < p_sub + p_del:
        if len(word) <= 2:
            return word
        return word[:i] + word[i + 1 :]
    targets = sorted(ins)
    t = rng.choices(targets, weights=[ins[x] for x in targets])[0]
    return word[: i + 1] + t + word[i + 1 :]


def _rand_word(rng, lo, hi):
    return "".join(rng.choice(ALPHABET) for _ in range(rng.randint(lo, hi)))


def make_language(seed, n_base=300, n_twins=30, n_hubs=11):
    rng = random.Random(seed)
    subs, ins = make_confusion_tables(seed * 7 + 1)

    hubs = []
    while len(hubs) < n_hubs:
        w = _rand_word(rng, 5, 5)
        if all(dl_distance(w, h) >= 3 for h in hubs):
            hubs.append(w)
    taken = set(hubs)

    child_pairs = []
    for h in hubs:
        while True:
            p1, p2 = rng.sample(range(5), 2)
            a1 = rng.choice([x for x in ALPHABET if x != h[p1]])
            c1 = h[:p1] + a1 + h[p1 + 1 :]
            a2 = rng.choice([x for x in ALPHABET if x != c1[p2]])
            c2 = c1[:p2] + a2 + c1[p2 + 1 :]
            if c1 not in taken and c2 not in taken and c1 != c2:
                child_pairs.append((c1, c2))
                taken.update((c1, c2))
                break

    base = set()
    while len(base) < n_base:
        w = _rand_word(rng, 4, 9)
        if w not in taken and all(dl_distance(w, h) >= 3 for h in hubs):
            base.add(w)
            taken.add(w)
    base = sorted(base)

    twins = []
    for w in base:
        if len(twins) >= n_twins:
            break
        i = rng.randrange(len(w))
        c = w[i]
        primary = max(subs[c], key=lambda t: subs[c][t])
        tw = w[:i] + primary + w[i + 1 :]
        if tw not in taken and len(tw) >= 4:
            twins.append((w, tw))
            taken.add(tw)

    normal = sorted(set(base) | {b for _, b in twins})
    succ = {w: rng.sample([x for x in base if x != w], rng.randint(4, 5)) for w in normal}
    for a, b in twins:
        pool = [x for x in base if x not in (a, b)]
        rng.shuffle(pool)
        succ[a] = pool[:5]
        succ[b] = pool[5:10]
    hub_menu = {h: rng.sample(base, 6) for h in hubs}
    pair_menu = {}
    for c1, c2 in child_pairs:
        menu = rng.sample(base, 4)
        pair_menu[c1] = menu
        pair_menu[c2] = menu

    return {
        "words": sorted(taken), "hubs": hubs, "child_pairs": child_pairs,
        "normal": normal, "twins": twins, "succ": succ,
        "hub_menu": hub_menu, "pair_menu": pair_menu,
        "subs": subs, "ins": ins,
    }


def sample_sentence(lang, rng, p_hub=0.22):
    hubs = lang["hubs"]
    hubset = set(hubs)
    succ, hub_menu, pair_menu = lang["succ"], lang["hub_menu"], lang["pair_menu"]
    pair_of = dict(zip(hubs, lang["child_pairs"]))
    normal = lang["normal"]
    nonhub = normal + sorted(pair_menu)
    n = rng.randint(4, 9)
    out = [rng.choice(normal)]
    while len(out) < n:
        if rng.random() < p_hub:
            out.append(rng.choice(hubs))
            continue
        prev = out[-1]
        if prev in hubset:
            if rng.random() < 0.45:
                c1, c2 = pair_of[prev]
                out.append(c1 if rng.random() < 0.60 else c2)
            else:
                out.append(rng.choice(hub_menu[prev]))
        elif prev in pair_menu:
            out.append(rng.choice(pair_menu[prev]))
        elif rng.random() < 0.97:
            out.append(rng.choice(succ[prev]))
        else:
            out.append(rng.choice(nonhub))
    return out


def make_noisy_corpus(lang, n_sentences, seed, corrupt_rate=0.12):
    """Clean sentences with per-token corruption; hubs stay intact."""
    rng = random.Random(seed)
    hubs = set(lang["hubs"])
    lines = []
    for _ in range(n_sentences):
        toks = sample_sentence(lang, rng)
        noisy = [
            corrupt_word(t, lang["subs"], lang["ins"], rng)
            if (t not in hubs and rng.random() < corrupt_rate) else t
            for t in toks
        ]
        lines.append(" ".join(noisy) + ".")
    return lines


def make_clean_sentences(lang, n, seed):
    rng = random.Random(seed)
    return [" ".join(sample_sentence(lang, rng)) for _ in range(n)]


def train_channel(lines):
    table = ingest(lines)
    triples = extract_triples(table)
    alphabet = set()
    for w in table.counts:
        alphabet.update(w)
    return table, triples, train_confusion(triples, alphabet)


class BenchmarkWorld:
    """Fully trained two-corpus pipeline, deterministic for a given seed."""

    def __init__(self, seed=11, n_train=15000, n_eval=2000):
        self.lang = make_language(seed)
        base = seed * 1000
        self.noisy_a = make_noisy_corpus(self.lang, n_train, seed=base + 101)
        self.noisy_b = make_noisy_corpus(self.lang, n_train, seed=base + 202)
        self.clean_b = [s + "." for s in make_clean_sentences(self.lang, n_train, base + 505)]
        self.eval_clean = make_clean_sentences(self.lang, n_eval, base + 303)

        self.table_a, self.triples_a, self.channel_a = train_channel(self.noisy_a)
        self.table_b, self.triples_b, self.channel_b = train_channel(self.noisy_b)
        self.lm = train_kn(self.clean_b, vocab_cutoff=20)
        self.vocab_counts = {
            w: c for w, c in ingest(self.clean_b).counts.items() if c >= 20
        }
        self.noise_model, self.achieved_rate = calibrate_rate_scale(
            self.eval_clean, self.channel_a, target=0.25, seed=base + 404)
        self.dataset = build_eval_dataset(self.eval_clean, self.noise_model)
        self.index = CandidateIndex.build(self.vocab_counts)
        self.models = CorrectionModels(self.channel_b, self.lm, self.index, LATIN)


# criterion-style channel recovery uses a separate, analytically tractable
# process: fixed-length words, exactly one edit per word, so the expected
# per-row edit distribution has a closed form
RECOVERY_ALPHABET = "abcdefgh"
RECOVERY_WORD_LEN = 6
RECOVERY_P_SUB = 0.72
RECOVERY_P_DEL = 0.18


def make_recovery_tables(seed):
    rng = random.Random(seed)
    subs = {}
    for c in RECOVERY_ALPHABET:
        others = [x for x in RECOVERY_ALPHABET if x != c]
        rng.shuffle(others)
        dist = {others[0]: 0.55, others[1]: 0.30}
        for x in others[2:]:
            dist[x] = 0.15 / len(others[2:])
        subs[c] = dist
    ins = {c: 1.0 / len(RECOVERY_ALPHABET) for c in RECOVERY_ALPHABET}
    return subs, ins


def generate_recovery_triples(n, seed):
    """Triples from the single-edit process plus the exact expected
    per-character edit distribution it induces."""
    from collections import Counter

    from spellchannel.channel import Triple

    subs, ins = make_recovery_tables(seed * 31 + 7)
    rng = random.Random(seed)
    pair_counts = Counter()
    for _ in range(n):
        word = "".join(rng.choice(RECOVERY_ALPHABET) for _ in range(RECOVERY_WORD_LEN))
        noisy = corrupt_word(word, subs, ins, rng,
                             p_sub=RECOVERY_P_SUB, p_del=RECOVERY_P_DEL)
        pair_counts[(word, noisy)] += 1
    triples = [Triple(correct=w, misspelled=m, frequency=c)
               for (w, m), c in sorted(pair_counts.items())]

    p_edit = 1.0 / RECOVERY_WORD_LEN
    expected = {}
    for c in RECOVERY_ALPHABET:
        row = {t: p_edit * RECOVERY_P_SUB * subs[c].get(t, 0.0)
               for t in RECOVERY_ALPHABET if t != c}
        row[""] = p_edit * RECOVERY_P_DEL
        row[c] = 1.0 - p_edit * (RECOVERY_P_SUB + RECOVERY_P_DEL)
        expected[c] = row
    expected[""] = dict(ins)
    return triples, expected
