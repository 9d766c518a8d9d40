"""Seeded synthetic corpora with ground truth, for tests, benchmarks and demos.

A corpus is a set of works. Each work has a journal version, an e-print
version, or both (a concordant pair). Records cite earlier works through
generated reference strings whose true target is known; a share of references
point at "ghost" works that are deliberately absent from the corpus, and a
share carry perturbation noise. Reads come from topical sessions plus a few
robot sessions.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import AuthorName, BibRecord, Kind
from .readstats import ReadEvent
from .text import fold

VENUES = ("ApJ", "MNRAS", "A&A", "AJ", "PhRvD", "NuPhB", "PASP", "Icar")
TOPICS = {
    "astro-ph.CO": "dark energy cosmological constant weak lensing baryon acoustic oscillations supernova survey redshift "
    "cosmic microwave background inflation galaxy clusters",
    "astro-ph.GA": "galaxy formation spiral arms bar instability star formation rate metallicity gradient dwarf "
    "satellites halo merger tidal streams",
    "astro-ph.SR": "stellar evolution red giant asteroseismology binary stars white dwarf convection rotation "
    "magnetic activity flares neutron",
    "astro-ph.HE": "gamma ray burst accretion disk black hole jet neutron star pulsar magnetar cosmic rays "
    "high energy emission",
    "hep-th": "string theory supersymmetry gauge duality holography anomaly brane compactification "
    "conformal field entanglement",
    "gr-qc": "gravitational waves numerical relativity black hole horizon quasinormal modes spacetime "
    "inspiral binary detector",
}
GLUE = ("of", "in", "the", "for", "and", "with", "from")
_SYL = ("ba", "ka", "lo", "mi", "ne", "ro", "sa", "ti", "vu", "ze", "har", "ken", "mur", "stein", "berg",
        "son", "ova", "ski", "ton", "ley", "wic", "dor", "gan", "per")
_SPECIAL = ("Müller", "Varga", "Okafor", "Lindqvist", "Moreau", "Petrov", "Núñez", "Øster", "van der Berg")


@dataclass
class LabeledReference:
    citing: str
    raw: str
    target: str | None  # true cited record, None for a work outside the corpus
    noisy: bool = False


@dataclass
class SyntheticCorpus:
    records: list[BibRecord]
    references: list[LabeledReference]
    reads: list[ReadEvent]
    pairs: list[tuple[str, str]] = field(default_factory=list)  # true (eprint, journal) links

    def write_records(self, path: str | Path) -> Path:
        """JSON lines in the ingestion format (no derived fields)."""
        path = Path(path)
        with open(path, "w", encoding="utf-8") as fh:
            for r in self.records:
                obj = r.to_json()
                obj.pop("resolved_refs")
                obj.pop("concordance")
                fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")
        return path

    def write_reads(self, path: str | Path) -> Path:
        path = Path(path)
        lines = ["session_id,record_id,timestamp"]
        lines += [f"{e.session},{e.record},{e.at.isoformat()}" for e in self.reads]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


@dataclass
class _Work:
    authors: tuple[AuthorName, ...]
    title: str
    category: str
    published: dt.date
    venue: str
    volume: int
    page: int
    journal_id: str | None = None
    eprint_id: str | None = None
    eprint_date: dt.date | None = None


def _initial(last: str) -> str:
    c = fold(last).lstrip()[:1].upper()
    return c if "A" <= c <= "Z" else "X"


def _journal_id(w: _Work) -> str:
    return f"{w.published.year}{w.venue:.<5}{w.volume:.>4}.{w.page:.>4}{_initial(w.authors[0].last)}"


def _eprint_id(year: int, month: int, num: int, last: str) -> str:
    return f"{year}arXiv{year % 100:02d}{month:02d}.{num:04d}{_initial(last)}"


class _Gen:
    def __init__(self, seed: int, n_names: int):
        self.rng = random.Random(seed)
        names = set(_SPECIAL)
        while len(names) < n_names:
            k = self.rng.choice((2, 2, 3))
            names.add("".join(self.rng.choice(_SYL) for _ in range(k)).capitalize())
        self.names = sorted(names)
        self.initials = {n: self._initials() for n in self.names}

    def _initials(self) -> str:
        letters = "ABCDEFGHJKLMNOPRSTW"
        k = self.rng.choice((1, 1, 2))
        return ". ".join(self.rng.choice(letters) for _ in range(k)) + "."

    def authors(self) -> tuple[AuthorName, ...]:
        k = self.rng.choice((1, 2, 2, 3, 3, 4, 5, 6))
        picked = self.rng.sample(self.names, k)
        return tuple(AuthorName(n, self.initials[n]) for n in picked)

    def title(self, category: str) -> str:
        vocab = TOPICS[category].split()
        words = self.rng.sample(vocab, self.rng.randint(3, 5))
        words.insert(self.rng.randint(1, len(words) - 1), self.rng.choice(GLUE))
        return " ".join(words).capitalize()


def reference_string(authors, year: int, venue: str, volume: int | None, page, style: int, eprint: str | None = None) -> str:
    def name(a: AuthorName) -> str:
        return f"{a.last}, {a.first_initials}".strip(", ")

    if len(authors) > 3 or style == 1:
        who = f"{name(authors[0])} et al."
    elif len(authors) == 1:
        who = name(authors[0])
    else:
        who = ", ".join(name(a) for a in authors[:-1]) + ", & " + name(authors[-1])
    if eprint is not None:
        return f"{who} {year}, arXiv:{eprint}"
    if volume is None:
        return f"{who} {year}, {venue}"
    if style == 2:
        return f"{who} {year}, {venue}, {volume}:{page}"
    return f"{who} {year}, {venue}, {volume}, {page}"


def _perturb(rng: random.Random, w: _Work, year: int, venue: str, volume, page, eprint) -> tuple:
    """Apply one kind of noise. Returns (authors, year, venue, volume, page, eprint, whitespace_junk)."""
    authors = list(w.authors)
    kind = rng.randrange(8)
    junk = False
    if kind == 0:
        authors = [AuthorName(a.last, "") for a in authors]
    elif kind == 1 and eprint is None:
        v = list(venue)
        i = rng.randrange(len(v))
        del v[i]
        venue = "".join(v) or venue + "x"
    elif kind == 2:
        year = year + rng.choice((-1, 1))
    elif kind == 3 and eprint is None:
        volume = page = None
    elif kind == 4:
        authors = authors[:1]
    elif kind == 5:
        junk = True
    elif kind == 6 and len(authors) > 2:
        authors = authors[:2]
    elif kind == 7 and eprint is None and page is not None:
        page = page + rng.randint(1, 9)
    else:
        junk = True
    return tuple(authors), year, venue, volume, page, eprint, junk


def generate(
    n_records: int = 1000,
    n_refs: int = 3000,
    noise: float = 0.10,
    ghost_fraction: float = 0.15,
    pair_fraction: float = 0.45,
    eprint_only_fraction: float = 0.25,
    n_names: int = 400,
    n_sessions: int = 400,
    n_robots: int = 2,
    recent_fraction: float = 0.1,
    start: dt.date = dt.date(2001, 1, 1),
    end: dt.date = dt.date(2005, 12, 31),
    seed: int = 0,
) -> SyntheticCorpus:
    g = _Gen(seed, n_names)
    rng = g.rng
    span = (end - start).days
    used_ids: set[str] = set()
    cats = sorted(TOPICS)

    def new_work(published: dt.date) -> _Work:
        cat = rng.choice(cats)
        return _Work(g.authors(), g.title(cat), cat, published, rng.choice(VENUES), rng.randint(1, 999), rng.randint(1, 9999))

    works: list[_Work] = []
    eprint_nums: dict[tuple[int, int], int] = {}
    n = 0
    while n < n_records:
        if rng.random() < recent_fraction:
            published = end - dt.timedelta(days=rng.randrange(45))
        else:
            published = start + dt.timedelta(days=rng.randrange(span))
        w = new_work(published)
        roll = rng.random()
        has_journal = roll >= eprint_only_fraction
        has_eprint = roll < eprint_only_fraction + pair_fraction
        if n + has_journal + has_eprint > n_records:
            has_eprint, has_journal = True, False
        if has_journal:
            jid = _journal_id(w)
            while jid in used_ids:
                w.page = rng.randint(1, 9999)
                jid = _journal_id(w)
            w.journal_id = jid
            used_ids.add(jid)
        if has_eprint:
            e_date = published - dt.timedelta(days=rng.randint(20, 300)) if has_journal else published
            e_date = max(e_date, start)
            key = (e_date.year, e_date.month)
            eprint_nums[key] = eprint_nums.get(key, 0) + 1
            w.eprint_id = _eprint_id(e_date.year, e_date.month, eprint_nums[key], w.authors[0].last)
            w.eprint_date = e_date
            used_ids.add(w.eprint_id)
        works.append(w)
        n += has_journal + has_eprint

    # records are created after the reference lists are drawn, so keep refs per citing id
    refs_by_citing: dict[str, list[str]] = {}
    labeled: list[LabeledReference] = []
    citers = [(w, rid) for w in works for rid in (w.journal_id, w.eprint_id) if rid]
    citers.sort(key=lambda t: t[1])
    by_date = sorted(works, key=lambda w: w.eprint_date or w.published)

    def cited_versions(target: _Work, citing_date: dt.date):
        out = []
        if target.journal_id and target.published < citing_date:
            out.append(("journal", target.journal_id))
        if target.eprint_id and target.eprint_date < citing_date:
            out.append(("eprint", target.eprint_id))
        return out

    attempts = 0
    while len(labeled) < n_refs and attempts < n_refs * 50:
        attempts += 1
        w, citing_id = rng.choice(citers)
        citing_date = w.eprint_date if citing_id == w.eprint_id else w.published
        if rng.random() < ghost_fraction:
            ghost = new_work(citing_date - dt.timedelta(days=rng.randint(30, 2000)))
            kind, target_id = "journal", None
            target = ghost
        else:
            older = [t for t in by_date if t is not w and (t.eprint_date or t.published) < citing_date]
            if not older:
                continue
            # mild preferential attachment towards a fixed subset keeps citation counts skewed
            target = older[int(len(older) * rng.random() ** 2)] if rng.random() < 0.5 else rng.choice(older)
            versions = cited_versions(target, citing_date)
            if not versions:
                continue
            kind, target_id = rng.choice(versions)
        if kind == "eprint":
            year, eprint = target.eprint_date.year, target.eprint_id[9:18]
        else:
            year, eprint = target.published.year, None
        venue, volume, page = target.venue, target.volume, target.page
        authors = target.authors
        noisy = rng.random() < noise
        junk = False
        if noisy:
            authors, year, venue, volume, page, eprint, junk = _perturb(rng, target, year, venue, volume, page, eprint)
        style = rng.choice((0, 0, 1, 2))
        raw = reference_string(authors, year, venue, volume, page, style, eprint)
        if junk:
            raw = "  " + raw.replace(", ", " ,  ").replace(". ", ".  ") + " ."
        refs_by_citing.setdefault(citing_id, []).append(raw)
        labeled.append(LabeledReference(citing_id, raw, target_id, noisy))

    records: list[BibRecord] = []
    pairs = []
    for w in works:
        abstract = g.title(w.category) + ". " + g.title(w.category) + "."
        common = dict(title=w.title, abstract=abstract, authors=w.authors, categories=(w.category,))
        if w.journal_id:
            added = min(w.published + dt.timedelta(days=rng.randint(0, 20)), end)
            records.append(BibRecord(id=w.journal_id, kind=Kind.JOURNAL, date_added=added, date_published=w.published,
                                     reference_strings=tuple(refs_by_citing.get(w.journal_id, ())), **common))
        if w.eprint_id:
            # the posted e-print title sometimes differs slightly from the published one
            title = w.title if not w.journal_id or rng.random() < 0.7 else w.title + " revisited"
            e = BibRecord(id=w.eprint_id, kind=Kind.EPRINT, date_added=w.eprint_date, date_published=w.eprint_date,
                          reference_strings=tuple(refs_by_citing.get(w.eprint_id, ())), **common)
            records.append(dataclasses.replace(e, title=title))
        if w.journal_id and w.eprint_id:
            pairs.append((w.eprint_id, w.journal_id))
    records.sort(key=lambda r: r.id)

    reads = _sessions(rng, records, n_sessions, n_robots, end)
    return SyntheticCorpus(records, labeled, reads, sorted(pairs))


def _sessions(rng: random.Random, records: list[BibRecord], n_sessions: int, n_robots: int, end: dt.date) -> list[ReadEvent]:
    by_cat: dict[str, list[str]] = {}
    for r in records:
        by_cat.setdefault(r.categories[0], []).append(r.id)
    cats = sorted(by_cat)
    base = dt.datetime(end.year, end.month, end.day, tzinfo=dt.timezone.utc)
    events = []
    for s in range(n_sessions):
        pool = by_cat[rng.choice(cats)]
        k = min(len(pool), rng.randint(1, 8))
        for rid in rng.sample(pool, k):
            at = base - dt.timedelta(minutes=rng.randrange(60 * 24 * 90))
            events.append(ReadEvent(f"s{s:05d}", rid, at))
    ids = [r.id for r in records]
    for b in range(n_robots):
        for rid in rng.sample(ids, min(len(ids), 250)):
            events.append(ReadEvent(f"bot{b:02d}", rid, base - dt.timedelta(seconds=rng.randrange(3600))))
    events.sort()
    return events
