"""Vector representations: TF-IDF, word vectors, stored embeddings, hashing."""

from .vectors import DenseVector, SparseVector, cosine
from .tfidf import TfidfModel, fit_tfidf, tfidf_vector
from .wordvec import WordVectorTable, load_word_vectors, pooled_embedding
from .hashing import hash_embed
from .store import EmbeddingStore, load_store, save_store
from .providers import (
    HashEmbedder,
    StoreEmbedder,
    WordVectorEmbedder,
    sentence_embeddings,
    token_matrices,
)

__all__ = [
    "DenseVector", "EmbeddingStore", "HashEmbedder", "SparseVector",
    "StoreEmbedder", "TfidfModel", "WordVectorEmbedder", "WordVectorTable",
    "cosine", "fit_tfidf", "hash_embed", "load_store", "load_word_vectors",
    "pooled_embedding", "save_store", "sentence_embeddings", "tfidf_vector",
    "token_matrices",
]
