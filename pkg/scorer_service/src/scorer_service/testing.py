"""Deterministic tiny model for offline tests.

Builds a seeded random-weight BERT with a hand-assembled WordPiece
vocabulary and saves it like any pretrained checkpoint, so the service
stack can be exercised end to end without downloading anything.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

BASE_WORDS = [
    "the", "a", "an", "waiter", "waitress", "he", "she", "him", "her",
    "king", "queen", "actor", "actress", "father", "mother", "uncle", "aunt",
    "came", "over", "left", "runs", "sits", "sings", "works", "sleeps",
    "table", "tree", "house", "song", "river", "good", "tall", "late",
    "fast", "slow", "now", "then", "here", "there", "and", "with", "saw",
    ".", ",", "!", "?",
]

SUBWORD_PIECES = ["##s", "##ing", "##ed", "##er"]


def build_tiny_model(directory, seed: int = 0,
                     extra_words: Sequence[str] = (),
                     hidden_size: int = 32,
                     num_layers: int = 2,
                     num_heads: int = 2) -> str:
    import torch
    from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors
    from transformers import BertConfig, BertForMaskedLM, PreTrainedTokenizerFast

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    words = list(dict.fromkeys(BASE_WORDS + [w.lower() for w in extra_words]))
    vocab_tokens = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + words + SUBWORD_PIECES
    vocab = {token: i for i, token in enumerate(vocab_tokens)}

    wordpiece = models.WordPiece(vocab, unk_token="[UNK]", max_input_chars_per_word=64)
    tokenizer = Tokenizer(wordpiece)
    tokenizer.normalizer = normalizers.BertNormalizer(lowercase=True)
    tokenizer.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    tokenizer.post_processor = processors.BertProcessing(
        sep=("[SEP]", vocab["[SEP]"]), cls=("[CLS]", vocab["[CLS]"]))
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        unk_token="[UNK]", pad_token="[PAD]", cls_token="[CLS]",
        sep_token="[SEP]", mask_token="[MASK]")
    fast.save_pretrained(directory)

    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(vocab_tokens),
        hidden_size=hidden_size,
        num_hidden_layers=num_layers,
        num_attention_heads=num_heads,
        intermediate_size=hidden_size * 2,
        max_position_embeddings=128,
    )
    model = BertForMaskedLM(config)
    model.eval()
    model.save_pretrained(directory)
    return str(directory)
