"""Fixture builders and brute-force oracles shared by the test modules.

The oracles deliberately avoid the package's index, graph and kernel code:
they rescan records directly so they can catch bugs in those layers.
"""

from __future__ import annotations

import datetime as dt
import math
import random
from collections import defaultdict
from itertools import combinations

from vjournal.corpus import AuthorName, BibRecord, Corpus, Kind
from vjournal.query import And, AuthorPrefix, Not, Or, Phrase, Term, positive_leaves
from vjournal.readstats import ReadEvent
from vjournal.text import normalize_initials, normalize_last, tokenize

D0 = dt.date(2005, 6, 1)


def jid(n: int, year: int = 2005, initial: str = "K") -> str:
    """A journal RecordId with volume and page both derived from ``n``."""
    vol = f"{n % 10000:4d}".replace(" ", ".")
    page = f"{n % 10000:4d}".replace(" ", ".")
    return f"{year}ApJ..{vol}.{page}{initial}"


def eid(n: int, year: int = 2005, initial: str = "K") -> str:
    return f"{year}arXiv{year % 100:02d}01.{n % 10000:04d}{initial}"


def rec(
    rid: str,
    title: str = "untitled work",
    *,
    kind: Kind | None = None,
    abstract: str = "",
    authors=(("Smith", "J"),),
    categories=("astro-ph",),
    added: dt.date = D0,
    published: dt.date | None = None,
    refs=(),
    resolved=(),
    concordance: str | None = None,
) -> BibRecord:
    if kind is None:
        kind = Kind.EPRINT if "arXiv" in rid else Kind.JOURNAL
    return BibRecord(
        id=rid,
        kind=kind,
        title=title,
        abstract=abstract,
        authors=tuple(AuthorName(last, ini) for last, ini in authors),
        categories=tuple(categories),
        date_added=added,
        date_published=published or added,
        reference_strings=tuple(refs),
        resolved_refs=tuple(resolved),
        concordance=concordance,
    )


def linked_corpus(records, links=()) -> Corpus:
    c = Corpus(records)
    for e, j in links:
        c.link(e, j)
    return c


# -- random corpora and queries ------------------------------------------------

VOCAB = ["dark", "energy", "lensing", "weak", "strong", "cluster", "galaxy", "survey", "quasar", "halo", "dust", "jet"]
LASTS = ["Varga", "Okafor", "Lindqvist", "Moreau", "Tanaka", "Novak", "Castillo", "Haddad"]
INITIALS = ["M", "MJ", "E", "A", "G", "C", "SS", "D"]
CATS = ["astro-ph", "astro-ph.CO", "gr-qc", "hep-th"]


def random_records(rng: random.Random, n: int, start: dt.date = dt.date(2005, 1, 1), days: int = 200) -> list[BibRecord]:
    out = []
    nums = rng.sample(range(1, 9999), n)
    for num in nums:
        eprint = rng.random() < 0.5
        rid = eid(num) if eprint else jid(num)
        words = lambda k: " ".join(rng.choice(VOCAB + ["the", "of"]) for _ in range(k))  # noqa: E731
        authors = tuple(
            (rng.choice(LASTS), rng.choice(INITIALS)) for _ in range(rng.randint(1, 3))
        )
        out.append(
            rec(
                rid,
                words(rng.randint(1, 6)) or "survey",
                abstract=words(rng.randint(0, 8)),
                authors=authors,
                categories=tuple(rng.sample(CATS, rng.randint(1, 2))),
                added=start + dt.timedelta(days=rng.randrange(days)),
            )
        )
    return out


def random_link_corpus(rng: random.Random, records: list[BibRecord], p_link: float = 0.3) -> Corpus:
    c = Corpus(records)
    eps = [r.id for r in records if r.kind is Kind.EPRINT]
    js = [r.id for r in records if r.kind is Kind.JOURNAL]
    rng.shuffle(js)
    for e in eps:
        if js and rng.random() < p_link:
            c.link(e, js.pop())
    return c


def random_query_text(rng: random.Random, depth: int = 0) -> str:
    """One expression from the query grammar, biased towards small trees."""
    r = rng.random()
    if depth >= 3 or r < 0.35:
        return _random_leaf_text(rng)
    if r < 0.55:
        return f"{random_query_text(rng, depth + 1)} {random_query_text(rng, depth + 1)}"
    if r < 0.7:
        return f"({random_query_text(rng, depth + 1)} OR {random_query_text(rng, depth + 1)})"
    if r < 0.8:
        return f"{random_query_text(rng, depth + 1)} NOT {_random_leaf_text(rng)}"
    if r < 0.9:
        fld = rng.choice(["title", "abstract", "category", "any"])
        return f"{fld}:({random_query_text(rng, depth + 1)})"
    return f"{random_query_text(rng, depth + 1)} AND {random_query_text(rng, depth + 1)}"


def _random_leaf_text(rng: random.Random) -> str:
    r = rng.random()
    if r < 0.45:
        return rng.choice(VOCAB)
    if r < 0.6:
        return f"{rng.choice(['title', 'abstract', 'any'])}:{rng.choice(VOCAB)}"
    if r < 0.75:
        return '"' + " ".join(rng.choice(VOCAB) for _ in range(2)) + '"'
    if r < 0.85:
        last = rng.choice(LASTS)
        ini = rng.choice(["", "M", "E", "MJ", "A"])
        return f'author:"{last}, {ini}"' if ini else f'author:"{last}"'
    if r < 0.93:
        return f"category:{rng.choice(['astro', 'ph', 'co', 'qc', 'hep'])}"
    return f"author:{rng.choice(LASTS).lower()}"


# -- linear-scan query oracle ----------------------------------------------------


def _fields(r: BibRecord) -> dict[str, list[str]]:
    return {
        "title": tokenize(r.title),
        "abstract": tokenize(r.abstract),
        "author": [t for a in r.authors for t in tokenize(a.last + " " + a.first_initials)],
        "category": [t for c in r.categories for t in tokenize(c)],
    }


def _run(seq: list[str], toks: tuple[str, ...]) -> bool:
    n = len(toks)
    return any(tuple(seq[i : i + n]) == toks for i in range(len(seq) - n + 1))


def oracle_match(node, r: BibRecord) -> bool:
    f = _fields(r)
    if isinstance(node, Term):
        names = list(f) if node.field == "any" else [node.field]
        return any(node.token in f[n] for n in names)
    if isinstance(node, Phrase):
        names = list(f) if node.field == "any" else [node.field]
        for n in names:
            if n in ("title", "abstract"):
                if _run(f[n], node.tokens):
                    return True
            elif all(t in f[n] for t in node.tokens):
                return True
        return False
    if isinstance(node, AuthorPrefix):
        return any(
            normalize_last(a.last) == node.last
            and (not node.first_initials or normalize_initials(a.first_initials).startswith(node.first_initials))
            for a in r.authors
        )
    if isinstance(node, Not):
        return not oracle_match(node.child, r)
    if isinstance(node, And):
        return all(oracle_match(c, r) for c in node.children)
    if isinstance(node, Or):
        return any(oracle_match(c, r) for c in node.children)
    raise TypeError(node)


def oracle_set(node, records) -> set[str]:
    return {r.id for r in records if oracle_match(node, r)}


def oracle_ranked(node, records) -> list[tuple[str, float]]:
    records = list(records)
    n = len(records)
    hits = [r for r in records if oracle_match(node, r)]
    scores = {r.id: 0.0 for r in hits}
    for leaf in positive_leaves(node):
        if isinstance(leaf, Term):
            df = sum(1 for r in records if any(leaf.token in v for v in _fields(r).values()))
        else:
            df = len(oracle_set(leaf, records))
        for r in hits:
            if oracle_match(leaf, r):
                scores[r.id] += math.log(1.0 + n / df)
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


# -- second-order oracles --------------------------------------------------------


def _group_key(corpus: Corpus, rid: str) -> str:
    r = corpus.get(rid)
    return min(rid, r.concordance) if r.concordance else rid


def oracle_most_cited(node, corpus: Corpus, now: dt.date, cap: int = 10, window: int = 91) -> list[tuple[str, int]]:
    start = now - dt.timedelta(days=window)
    citing_by_group: dict[str, set[str]] = defaultdict(set)
    for r in corpus:
        if oracle_match(node, r) and start < r.date_added <= now:
            mine = _group_key(corpus, r.id)
            for c in r.resolved_refs:
                if c in corpus and _group_key(corpus, c) != mine:
                    citing_by_group[mine].add(_group_key(corpus, c))
    counts: dict[str, int] = defaultdict(int)
    for targets in citing_by_group.values():
        for t in targets:
            counts[t] += 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:cap]


def oracle_coread(events, group=lambda r: r, s_max: int = 200):
    """Quadratic recount of distinct-session reads and pairs."""
    sessions = sorted({e.session for e in events})
    reads: dict[str, int] = defaultdict(int)
    pairs: dict[tuple[str, str], int] = defaultdict(int)
    for s in sessions:
        recs = {e.record for e in events if e.session == s}
        if len(recs) > s_max:
            continue
        gs = sorted({group(r) for r in recs})
        for g in gs:
            reads[g] += 1
        for a, b in combinations(gs, 2):
            pairs[(a, b)] += 1
    return dict(pairs), dict(reads)


def oracle_most_popular(node, corpus: Corpus, events, cap: int = 10, seed_size: int = 100, s_max: int = 200):
    g = lambda r: _group_key(corpus, r)  # noqa: E731
    pairs, reads = oracle_coread(events, g, s_max)
    latest: dict[str, dt.date] = {}
    for r in corpus:
        if oracle_match(node, r):
            k = g(r.id)
            latest[k] = max(latest.get(k, r.date_added), r.date_added)
    seeds = sorted(latest, key=lambda k: (-reads.get(k, 0), -latest[k].toordinal(), k))[:seed_size]
    score: dict[str, int] = defaultdict(int)
    for s in seeds:
        for (a, b), c in pairs.items():
            if a == s:
                score[b] += c
            elif b == s:
                score[a] += c
    for s in seeds:
        score.pop(s, None)
    return sorted(((k, v) for k, v in score.items() if v > 0), key=lambda kv: (-kv[1], kv[0]))[:cap]


def random_events(rng: random.Random, ids: list[str], n_events: int, n_sessions: int) -> list[ReadEvent]:
    base = dt.datetime(2005, 6, 1, tzinfo=dt.timezone.utc)
    return [
        ReadEvent(f"s{rng.randrange(n_sessions):03d}", rng.choice(ids), base + dt.timedelta(minutes=i))
        for i in range(n_events)
    ]


def valid_query(rng: random.Random):
    """Draw query texts until one parses (pure negations and empty queries are rejected)."""
    from vjournal.errors import QueryParseError
    from vjournal.query import parse_query

    while True:
        try:
            return parse_query(random_query_text(rng))
        except QueryParseError:
            continue


# -- newsletter fixtures -----------------------------------------------------------

DAILY_DATE = dt.date(2005, 6, 30)


def daily_fixture() -> Corpus:
    """Five e-prints announced on DAILY_DATE plus distractors on other days and categories."""
    day = DAILY_DATE
    return Corpus(
        [
            rec(eid(40), "Weak lensing by galaxy clusters", authors=(("Varga", "M.J."), ("Okafor", "E.")), added=day),
            rec(eid(12), "Dust in high redshift quasars", authors=(("Tanaka", "C.S."),), added=day),
            rec(eid(31), "Strong lensing time delays", abstract="lensing lensing", authors=(("Novak", "S.S."),), added=day),
            rec(eid(7), "A survey of galaxy halos", authors=(("Lindqvist", "A."), ("Moreau", "G."), ("Haddad", "D."), ("Castillo", "M.")), added=day),
            rec(eid(55), "Dark energy & the <cosmic> web", authors=(("Müller", "J."),), categories=("astro-ph.CO",), added=day),
            rec(eid(60), "Lensing of the CMB", categories=("hep-th",), added=day),
            rec(eid(61), "Lensing yesterday", added=day - dt.timedelta(days=1)),
            rec(jid(62), "Lensing in a journal", added=day),
        ]
    )


def daily_profile(sort_query: str | None):
    from vjournal.newsletter import Profile

    return Profile("daily-test", daily_categories=("astro-ph", "astro-ph.CO"), daily_sort_query=sort_query)


# -- analytics fixtures --------------------------------------------------------------


def top_cited_fixture(n_works: int, eprinted: set[int]) -> Corpus:
    """``n_works`` journal papers where work i is cited by i+1 distinct citers (work 0 the least).

    Works whose index is in ``eprinted`` get an e-print twin. Citers are
    uncited journal papers from another year, so they rank below every work.
    """
    records: list[BibRecord] = []
    links = []
    n_citers = n_works + 1
    citers = [jid(5000 + k, year=1999) for k in range(n_citers)]
    cites: dict[str, list[str]] = defaultdict(list)
    for i in range(n_works):
        work = jid(i + 1)
        records.append(rec(work, f"work {i}"))
        if i in eprinted:
            twin = eid(i + 1, year=2004)
            records.append(rec(twin, f"work {i}"))
            links.append((twin, work))
        for k in range(i + 1):
            cites[citers[k]].append(work)
    records += [rec(c, "citer", resolved=tuple(cites[c])) for c in citers]
    return linked_corpus(records, links)
