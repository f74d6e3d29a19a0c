"""Raw post ingestion from Q&A dumps (xml-dump rows or jsonl objects)."""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import IO, Iterable

from ..errors import ConfigError, ParseError

QUESTION_POST = "question"
ANSWER_POST = "answer"

_TAG_SPLIT_RE = re.compile(r"[<>|]")


@dataclass(frozen=True)
class RawPost:
    """One question or answer row from a dump.

    Questions carry a title and no parent_id; answers the reverse.
    """

    post_id: int
    post_type: str
    parent_id: int | None = None
    title: str | None = None
    body_markup: str = ""
    tags: tuple[str, ...] = field(default=())
    score: int = 0

    def __post_init__(self):
        if self.post_type == QUESTION_POST:
            if self.title is None or self.parent_id is not None:
                raise ParseError(
                    f"question post {self.post_id} must have a title and no parent_id")
        elif self.post_type == ANSWER_POST:
            if self.parent_id is None or self.title is not None:
                raise ParseError(
                    f"answer post {self.post_id} must have a parent_id and no title")
        else:
            raise ParseError(f"post {self.post_id}: unknown post_type {self.post_type!r}")
        if any(t != t.lower() for t in self.tags):
            raise ParseError(f"post {self.post_id}: tags must be lowercase")


def _parse_tags(raw: str) -> tuple[str, ...]:
    return tuple(t.lower() for t in _TAG_SPLIT_RE.split(raw) if t)


def parse_posts(source: bytes | IO[bytes], fmt: str) -> list[RawPost]:
    """Parse a dump into RawPost records, preserving row order.

    ``fmt`` is "xml-dump" (rows with Id/PostTypeId/ParentId/Title/Body/Tags/
    Score attributes) or "jsonl" (one object per line with post_id, post_type,
    parent_id, title, body, tags, score). Rows that are neither questions nor
    answers are skipped.
    """
    data = source if isinstance(source, bytes) else source.read()
    if fmt == "xml-dump":
        return _parse_xml_dump(data)
    if fmt == "jsonl":
        return _parse_jsonl(data)
    raise ConfigError(f"unknown post format {fmt!r}")


def _parse_xml_dump(data: bytes) -> list[RawPost]:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed xml dump at line {line}, column {col}: {exc}") from exc
    posts: list[RawPost] = []
    for rownum, row in enumerate(root.iter("row"), start=1):
        try:
            type_id = int(row.attrib["PostTypeId"])
        except (KeyError, ValueError) as exc:
            raise ParseError(f"xml row {rownum}: bad or missing PostTypeId") from exc
        if type_id not in (1, 2):
            continue
        try:
            post_id = int(row.attrib["Id"])
            body = row.attrib.get("Body", "")
            score = int(row.attrib.get("Score", "0"))
            if type_id == 1:
                posts.append(RawPost(
                    post_id=post_id,
                    post_type=QUESTION_POST,
                    title=row.attrib["Title"],
                    body_markup=body,
                    tags=_parse_tags(row.attrib.get("Tags", "")),
                    score=score,
                ))
            else:
                posts.append(RawPost(
                    post_id=post_id,
                    post_type=ANSWER_POST,
                    parent_id=int(row.attrib["ParentId"]),
                    body_markup=body,
                    score=score,
                ))
        except (KeyError, ValueError, ParseError) as exc:
            raise ParseError(f"xml row {rownum}: {exc}") from exc
    return posts


def _parse_jsonl(data: bytes) -> list[RawPost]:
    posts: list[RawPost] = []
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            post_type = obj["post_type"]
            if post_type not in (QUESTION_POST, ANSWER_POST):
                continue
            posts.append(RawPost(
                post_id=int(obj["post_id"]),
                post_type=post_type,
                parent_id=obj.get("parent_id"),
                title=obj.get("title"),
                body_markup=obj.get("body", ""),
                tags=tuple(obj.get("tags") or ()),
                score=int(obj.get("score", 0)),
            ))
        except (KeyError, ValueError, TypeError, ParseError) as exc:
            raise ParseError(f"jsonl posts line {lineno}: {exc}") from exc
    return posts


def post_to_obj(post: RawPost) -> dict:
    return {
        "post_id": post.post_id,
        "post_type": post.post_type,
        "parent_id": post.parent_id,
        "title": post.title,
        "body": post.body_markup,
        "tags": list(post.tags),
        "score": post.score,
    }


def write_posts_jsonl(posts: Iterable[RawPost], fh: IO[str]) -> None:
    for post in posts:
        fh.write(json.dumps(post_to_obj(post), ensure_ascii=False) + "\n")
