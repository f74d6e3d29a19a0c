"""Q&A corpus layer: raw dumps -> cleaned, sentence-segmented question threads."""

from .markup import (
    CODE,
    FIGURE,
    LINK,
    TABLE,
    ArtifactSpan,
    strip_markup,
    substitute_placeholders,
)
from .posts import RawPost, parse_posts, write_posts_jsonl
from .sentences import ANSWER, QUESTION, Sentence, segment_sentences, sentence_key
from .assemble import (
    ARP,
    Corpus,
    build_arp,
    clean_body,
    corpus_from_posts,
    corpus_to_posts,
    load_corpus,
    save_corpus,
)

__all__ = [
    "ARP", "ANSWER", "ArtifactSpan", "CODE", "Corpus", "FIGURE", "LINK",
    "QUESTION", "RawPost", "Sentence", "TABLE", "build_arp", "clean_body",
    "corpus_from_posts", "corpus_to_posts", "load_corpus", "parse_posts",
    "save_corpus", "segment_sentences", "sentence_key", "strip_markup",
    "substitute_placeholders", "write_posts_jsonl",
]
