"""Subscriber profiles, weekly newsletters, daily alerts and their rendering."""

from __future__ import annotations

import dataclasses
import datetime as dt
import hashlib
import hmac
import html
import json
import os
import re
import textwrap
from dataclasses import dataclass, field
from pathlib import Path

from .config import Settings
from .corpus import BibRecord, Corpus, Kind
from .errors import LimitError, NotFoundError, ValidationError
from .index import IndexSnapshot, evaluate_query, match_author, match_positions
from .pipeline import Snapshots
from .query import AuthorPrefix, Or, QueryAst, parse_author_query, parse_query
from .secondorder import RankedList, most_cited, most_popular, recent

MAX_SUBJECT_QUERIES = 2
MAX_AUTHOR_QUERIES = 1
DEFAULT_WINDOW_DAYS = 7
TEXT_WIDTH = 80
SHOWN_AUTHORS = 3

_PROFILE_ID = re.compile(r"^[A-Za-z0-9_-]{1,64}$")
TOKEN_RE = re.compile(r"^[0-9a-f]{32}$")


# -- profiles ------------------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    profile_id: str
    subject_queries: tuple[str, ...] = ()
    author_queries: tuple[str, ...] = ()
    daily_categories: tuple[str, ...] = ()
    daily_sort_query: str | None = None
    last_run: dt.date | None = None

    @property
    def author_query(self) -> str | None:
        return self.author_queries[0] if self.author_queries else None

    def to_json(self) -> dict:
        return {
            "profile_id": self.profile_id,
            "subject_queries": list(self.subject_queries),
            "author_queries": list(self.author_queries),
            "daily_categories": list(self.daily_categories),
            "daily_sort_query": self.daily_sort_query,
            "last_run": self.last_run.isoformat() if self.last_run else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> Profile:
        authors = obj.get("author_queries")
        if authors is None:
            single = obj.get("author_query")
            authors = [single] if single else []
        elif isinstance(authors, str):
            authors = [authors]
        last_run = obj.get("last_run")
        return cls(
            profile_id=obj["profile_id"],
            subject_queries=tuple(obj.get("subject_queries") or ()),
            author_queries=tuple(authors),
            daily_categories=tuple(sorted(set(obj.get("daily_categories") or ()))),
            daily_sort_query=obj.get("daily_sort_query") or None,
            last_run=dt.date.fromisoformat(last_run) if last_run else None,
        )


@dataclass(frozen=True)
class CompiledProfile:
    profile: Profile
    subjects: tuple[QueryAst, ...]
    author: QueryAst | None
    daily_sort: QueryAst | None


def compile_profile(p: Profile) -> CompiledProfile:
    """Check limits and parse every stored query. Raises LimitError or QueryParseError."""
    if not _PROFILE_ID.match(p.profile_id or ""):
        raise ValidationError(f"invalid profile id {p.profile_id!r}")
    if len(p.subject_queries) > MAX_SUBJECT_QUERIES:
        raise LimitError(f"maximum of {MAX_SUBJECT_QUERIES} subject queries")
    if len(p.author_queries) > MAX_AUTHOR_QUERIES:
        raise LimitError(f"maximum of {MAX_AUTHOR_QUERIES} author query")
    subjects = tuple(parse_query(q) for q in p.subject_queries)
    author = parse_author_query(p.author_queries[0]) if p.author_queries else None
    daily = parse_query(p.daily_sort_query) if p.daily_sort_query else None
    return CompiledProfile(p, subjects, author, daily)


class ProfileStore:
    """One JSON document per profile, named ``<profile_id>.json``."""

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)

    def path(self, profile_id: str) -> Path:
        if not _PROFILE_ID.match(profile_id):
            raise ValidationError(f"invalid profile id {profile_id!r}")
        return self.directory / f"{profile_id}.json"

    def save(self, p: Profile) -> Profile:
        compile_profile(p)
        self.directory.mkdir(parents=True, exist_ok=True)
        text = json.dumps(p.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        self.path(p.profile_id).write_text(text, encoding="utf-8")
        return p

    def load(self, profile_id: str) -> Profile:
        path = self.path(profile_id)
        if not path.exists():
            raise NotFoundError(f"unknown profile {profile_id!r}")
        return Profile.from_json(json.loads(path.read_text(encoding="utf-8")))

    def ids(self) -> list[str]:
        if not self.directory.exists():
            return []
        return sorted(p.stem for p in self.directory.glob("*.json"))


def save_profile(p: Profile, store: ProfileStore | None = None) -> Profile:
    """Validate ``p`` (limits, query syntax) and persist it when a store is given."""
    compile_profile(p)
    return store.save(p) if store is not None else p


# -- documents -------------------------------------------------------------------


@dataclass(frozen=True)
class EntryInfo:
    id: str
    title: str
    authors: tuple[str, ...]
    n_authors: int
    date: dt.date
    kind: str

    @classmethod
    def of(cls, rec: BibRecord) -> EntryInfo:
        return cls(
            id=rec.id,
            title=" ".join(rec.title.split()),
            authors=tuple(a.display() for a in rec.authors[:SHOWN_AUTHORS]),
            n_authors=len(rec.authors),
            date=rec.date_added,
            kind=rec.kind.value,
        )

    def author_line(self) -> str:
        line = "; ".join(self.authors)
        return line + " et al." if self.n_authors > SHOWN_AUTHORS else line


@dataclass(frozen=True)
class SubjectSection:
    query: str
    recent: RankedList
    most_popular: RankedList
    most_cited: RankedList


@dataclass(frozen=True)
class NewsletterDoc:
    profile_id: str
    generated_at: dt.date
    window: tuple[dt.date, dt.date]
    subject_sections: tuple[SubjectSection, ...]
    author_query: str | None
    author_section: tuple[str, ...] | None
    citations_section: tuple[tuple[str, str], ...] | None
    public_token: str
    details: dict[str, EntryInfo] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class DailyAlert:
    profile_id: str
    date: dt.date
    entries: tuple[tuple[str, bool, float], ...]
    sort_query: str | None
    public_token: str
    details: dict[str, EntryInfo] = field(default_factory=dict, compare=False)

    @property
    def starred(self) -> set[str]:
        return {rid for rid, star, _ in self.entries if star}


def public_token(profile_id: str, generated_at: dt.date, kind: str = "weekly", secret: str = "") -> str:
    """32 hex chars of HMAC-SHA256 over (kind, profile, date); reproducible for fixed inputs."""
    msg = f"{kind}\x00{profile_id}\x00{generated_at.isoformat()}".encode()
    return hmac.new(secret.encode(), msg, hashlib.sha256).hexdigest()[:32]


def _author_papers(q: QueryAst, idx: IndexSnapshot) -> list[str]:
    return [idx.ids[i] for i in match_positions(q, idx).tolist()]


def generate_weekly(
    p: Profile, snaps: Snapshots, now: dt.date, settings: Settings = Settings()
) -> NewsletterDoc:
    """Assemble the weekly document. Pure: the caller records ``last_run`` afterwards."""
    cp = compile_profile(p)
    corpus, idx = snaps.corpus, snaps.idx
    since = p.last_run if p.last_run is not None else now - dt.timedelta(days=DEFAULT_WINDOW_DAYS)
    if since > now:
        raise ValidationError(f"last run {since} is after {now}")
    cap = settings.list_cap

    sections = []
    for raw, q in zip(p.subject_queries, cp.subjects):
        sections.append(
            SubjectSection(
                query=raw,
                recent=recent(q, corpus, idx, since, now, list_cap=cap),
                most_popular=most_popular(
                    q, corpus, idx, snaps.coread, now=now, list_cap=cap,
                    seed_size=settings.seed_size, seed_order=settings.seed_order,
                ),
                most_cited=most_cited(q, corpus, idx, snaps.graph, now, list_cap=cap),
            )
        )

    author_section = citations = None
    if cp.author is not None:
        in_window = [r for r in corpus if since < r.date_added <= now]
        prefixes = cp.author.children if isinstance(cp.author, Or) else (cp.author,)
        mine = [r for r in in_window if any(match_author(a, r) for a in prefixes if isinstance(a, AuthorPrefix))]
        mine.sort(key=lambda r: (-r.date_added.toordinal(), r.id))
        author_section = tuple(r.id for r in mine)

        own_groups = {corpus.group_key(rid) for rid in _author_papers(cp.author, idx)}
        pairs = set()
        for r in in_window:
            for cited in snaps.graph.record_edges.get(r.id, ()):
                if cited in own_groups:
                    pairs.add((r.id, cited))
        citations = tuple(sorted(pairs))

    shown: set[str] = set()
    for s in sections:
        for lst in (s.recent, s.most_popular, s.most_cited):
            shown.update(lst.ids)
    shown.update(author_section or ())
    for a, b in citations or ():
        shown.update((a, b))

    return NewsletterDoc(
        profile_id=p.profile_id,
        generated_at=now,
        window=(since, now),
        subject_sections=tuple(sections),
        author_query=p.author_query,
        author_section=author_section,
        citations_section=citations,
        public_token=public_token(p.profile_id, now, "weekly", settings.token_secret),
        details={rid: EntryInfo.of(corpus.get(rid)) for rid in sorted(shown)},
    )


def generate_daily(
    p: Profile, corpus: Corpus, idx: IndexSnapshot, date: dt.date, settings: Settings = Settings()
) -> DailyAlert:
    """E-prints added on ``date`` in the profile's categories, matches first and starred.

    Without a sort query entries are listed by id, none starred.
    """
    cp = compile_profile(p)
    cats = set(p.daily_categories)
    fresh = [
        r for r in corpus
        if r.kind is Kind.EPRINT and r.date_added == date and cats.intersection(r.categories)
    ]
    if cp.daily_sort is None:
        entries = tuple((r.id, False, 0.0) for r in sorted(fresh, key=lambda r: r.id))
    else:
        scores = dict(evaluate_query(cp.daily_sort, idx))
        rows = [(r.id, r.id in scores, scores.get(r.id, 0.0)) for r in fresh]
        rows.sort(key=lambda e: (not e[1], -e[2], e[0]))
        entries = tuple(rows)
    return DailyAlert(
        profile_id=p.profile_id,
        date=date,
        entries=entries,
        sort_query=p.daily_sort_query,
        public_token=public_token(p.profile_id, date, "daily", settings.token_secret),
        details={rid: EntryInfo.of(corpus.get(rid)) for rid, _, _ in entries},
    )


# -- rendering -----------------------------------------------------------------

_RULE = "=" * TEXT_WIDTH
_THIN = "-" * TEXT_WIDTH


def _wrap(text: str, indent: str) -> list[str]:
    return textwrap.wrap(text, TEXT_WIDTH, initial_indent=indent, subsequent_indent=indent,
                         break_long_words=True, break_on_hyphens=False) or [indent.rstrip()]


def _text_entry(info: EntryInfo, starred: bool = False, note: str = "") -> list[str]:
    head = ("* " if starred else "  ") + f"{info.id}  {info.date.isoformat()}"
    if note:
        head += f"  {note}"
    return [head] + _wrap(info.title, "    ") + _wrap(info.author_line(), "    ")


def _text_list(lines: list[str], lst: RankedList, details: dict[str, EntryInfo], note: str):
    if not lst.entries:
        lines.append("  (none)")
    for rid, score in lst.entries:
        lines.extend(_text_entry(details[rid], note=note.format(_fmt_score(score)) if note else ""))


def _fmt_score(score: float) -> str:
    return str(int(score)) if float(score).is_integer() else f"{score:.3f}"


def render_text(doc: NewsletterDoc | DailyAlert) -> str:
    lines: list[str] = []
    if isinstance(doc, DailyAlert):
        lines += [f"DAILY ALERT  {doc.profile_id}  {doc.date.isoformat()}"]
        lines += _wrap(f"Sorted by: {doc.sort_query}" if doc.sort_query else "Sorted by: e-print number", "")
        lines += [_RULE]
        if not doc.entries:
            lines.append("  (none)")
        for rid, starred, _ in doc.entries:
            lines.extend(_text_entry(doc.details[rid], starred))
        return "\n".join(lines) + "\n"

    since, now = doc.window
    lines += [f"WEEKLY OVERVIEW  {doc.profile_id}  {now.isoformat()}"]
    lines += [f"Added after {since.isoformat()} through {now.isoformat()}"]
    lines += [f"Public link: /n/{doc.public_token}", _RULE]
    if not doc.subject_sections:
        lines += ["", "SUBJECT QUERIES", "  (none)"]
    for n, s in enumerate(doc.subject_sections, 1):
        lines += [""] + _wrap(f"SUBJECT {n}: {s.query}", "") + [_THIN]
        lines.append("RECENT")
        _text_list(lines, s.recent, doc.details, "")
        lines.append("MOST POPULAR")
        _text_list(lines, s.most_popular, doc.details, "co-reads {}")
        lines.append("MOST CITED")
        _text_list(lines, s.most_cited, doc.details, "citations {}")
    if doc.author_section is not None:
        lines += [""] + _wrap(f"AUTHORS: {doc.author_query}", "") + [_THIN]
        lines.append("RECENT BY AUTHORS")
        if not doc.author_section:
            lines.append("  (none)")
        for rid in doc.author_section:
            lines.extend(_text_entry(doc.details[rid]))
        lines.append("CITATIONS TO YOUR PAPERS")
        if not doc.citations_section:
            lines.append("  (none)")
        for citing, cited in doc.citations_section or ():
            lines.extend(_wrap(f"  {citing} cites {cited}", ""))
            lines.extend(_wrap(doc.details[cited].title, "    "))
    return "\n".join(lines) + "\n"


_CSS = (
    "body{font-family:sans-serif;max-width:46em;margin:1em auto;}"
    "h2{border-bottom:1px solid #999;}li{margin-bottom:.5em;}"
    ".id{font-family:monospace;}.meta{color:#555;font-size:90%;}"
)


def _h(s: object) -> str:
    return html.escape(str(s), quote=True)


def _html_entry(info: EntryInfo, starred: bool = False, note: str = "") -> str:
    mark = "<strong>*</strong> " if starred else ""
    extra = f" <span class=\"meta\">{_h(note)}</span>" if note else ""
    return (
        f"<li>{mark}<span class=\"id\">{_h(info.id)}</span> {_h(info.title)}"
        f"<br/><span class=\"meta\">{_h(info.author_line())} ({_h(info.date.isoformat())})</span>{extra}</li>"
    )


def _html_list(out: list[str], title: str, lst: RankedList, details: dict[str, EntryInfo], note: str):
    out.append(f"<h3>{_h(title)}</h3>")
    if not lst.entries:
        out.append("<p>(none)</p>")
        return
    out.append("<ol>")
    for rid, score in lst.entries:
        out.append(_html_entry(details[rid], note=note.format(_fmt_score(score)) if note else ""))
    out.append("</ol>")


def render_html(doc: NewsletterDoc | DailyAlert) -> str:
    out: list[str] = []
    if isinstance(doc, DailyAlert):
        title = f"Daily alert {doc.profile_id} {doc.date.isoformat()}"
    else:
        title = f"Weekly overview {doc.profile_id} {doc.generated_at.isoformat()}"
    out.append("<!DOCTYPE html>")
    out.append("<html lang=\"en\"><head><meta charset=\"utf-8\"/>")
    out.append(f"<title>{_h(title)}</title><style>{_CSS}</style></head><body>")
    out.append(f"<h1>{_h(title)}</h1>")
    if isinstance(doc, DailyAlert):
        out.append(f"<p>Sorted by: {_h(doc.sort_query or 'e-print number')}</p>")
        if not doc.entries:
            out.append("<p>(none)</p>")
        else:
            out.append("<ul>")
            for rid, starred, _ in doc.entries:
                out.append(_html_entry(doc.details[rid], starred))
            out.append("</ul>")
    else:
        since, now = doc.window
        out.append(f"<p class=\"meta\">Added after {_h(since.isoformat())} through {_h(now.isoformat())}</p>")
        if not doc.subject_sections:
            out.append("<h2>Subject queries</h2><p>(none)</p>")
        for n, s in enumerate(doc.subject_sections, 1):
            out.append(f"<h2>Subject {n}: {_h(s.query)}</h2>")
            _html_list(out, "Recent", s.recent, doc.details, "")
            _html_list(out, "Most popular", s.most_popular, doc.details, "co-reads {}")
            _html_list(out, "Most cited", s.most_cited, doc.details, "citations {}")
        if doc.author_section is not None:
            out.append(f"<h2>Authors: {_h(doc.author_query)}</h2>")
            out.append("<h3>Recent by authors</h3>")
            if doc.author_section:
                out.append("<ul>")
                out.extend(_html_entry(doc.details[rid]) for rid in doc.author_section)
                out.append("</ul>")
            else:
                out.append("<p>(none)</p>")
            out.append("<h3>Citations to your papers</h3>")
            if doc.citations_section:
                out.append("<ul>")
                for citing, cited in doc.citations_section:
                    out.append(
                        f"<li><span class=\"id\">{_h(citing)}</span> cites "
                        f"<span class=\"id\">{_h(cited)}</span> {_h(doc.details[cited].title)}</li>"
                    )
                out.append("</ul>")
            else:
                out.append("<p>(none)</p>")
    out.append("</body></html>")
    return "\n".join(out) + "\n"


def render(doc: NewsletterDoc | DailyAlert, fmt: str = "text") -> bytes:
    if fmt == "text":
        return render_text(doc).encode("utf-8")
    if fmt == "html":
        return render_html(doc).encode("utf-8")
    raise ValidationError(f"unknown format {fmt!r}")


def write_outputs(doc: NewsletterDoc | DailyAlert, out_dir: str | os.PathLike) -> list[Path]:
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for fmt, ext in (("html", ".html"), ("text", ".txt")):
        path = d / f"{doc.public_token}{ext}"
        path.write_bytes(render(doc, fmt))
        paths.append(path)
    return paths


def mark_run(p: Profile, now: dt.date) -> Profile:
    return dataclasses.replace(p, last_run=now)
