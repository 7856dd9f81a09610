"""Masked-language-model scorer.

Likelihoods are read from the full unmasked sentence: the per-piece
log-probability of the true token at its own position.  Attention per
piece is the mean over all layers, heads and query positions of the
attention directed to that piece, normalized to mean 1 over the
sentence's non-special pieces so values are comparable across lengths.
Pieces are aggregated to words (sum of log-probs, mean of attentions)
so sentence scores line up with whitespace words on segmented text.

Inference only, no sampling: identical requests produce identical
outputs for a fixed model.
"""

from __future__ import annotations

import math
from typing import Dict, List, Tuple

import torch
from transformers import AutoModelForMaskedLM, AutoTokenizer

from .chunking import chunk_index, group_pieces
from .config import LIKELIHOOD_SPEC, ServiceConfig

#: Marker the wire protocol uses for the masked slot.
MASK_MARKER = "[MASK]"


class ScorerError(Exception):
    status = 500


class BadRequest(ScorerError):
    status = 400


class OverLength(ScorerError):
    status = 413


class AlignmentError(ScorerError):
    status = 422


def aggregate_pieces(log_probs: List[float], attentions: List[float],
                     groups: List[List[int]]) -> Tuple[List[float], List[float]]:
    """Word score from piece scores: log_prob sums, attention means."""
    word_log_probs = []
    word_attentions = []
    for group in groups:
        word_log_probs.append(math.fsum(log_probs[i] for i in group))
        word_attentions.append(
            math.fsum(attentions[i] for i in group) / len(group))
    return word_log_probs, word_attentions


class MlmScorer:
    def __init__(self, config: ServiceConfig):
        self.config = config
        torch.manual_seed(0)
        self.tokenizer = AutoTokenizer.from_pretrained(config.model)
        # eager attention: scaled-dot-product kernels refuse to return weights
        self.model = AutoModelForMaskedLM.from_pretrained(
            config.model, attn_implementation="eager")
        self.model.to(config.device)
        self.model.eval()

    def info(self) -> Dict:
        return {
            "model_id": self.config.model,
            "max_tokens": self.config.max_tokens,
            "embedding_dim": int(self.model.config.hidden_size),
            "attention": self.config.attention_spec,
            "likelihood": LIKELIHOOD_SPEC,
            "mask_token": self.tokenizer.mask_token,
        }

    def _encode(self, text: str):
        if not text.strip():
            raise BadRequest("text is empty")
        enc = self.tokenizer(
            text,
            return_tensors="pt",
            return_offsets_mapping=True,
            return_special_tokens_mask=True,
        )
        if enc["input_ids"].shape[1] > self.config.max_tokens:
            raise OverLength(
                f"input has {enc['input_ids'].shape[1]} tokens, "
                f"limit is {self.config.max_tokens}")
        offsets = [tuple(o) for o in enc.pop("offset_mapping")[0].tolist()]
        keep = [s == 0 for s in enc.pop("special_tokens_mask")[0].tolist()]
        enc = {k: v.to(self.config.device) for k, v in enc.items()}
        return enc, offsets, keep

    @torch.inference_mode()
    def token_scores(self, text: str) -> Dict:
        enc, offsets, keep = self._encode(text)
        out = self.model(**enc, output_attentions=True)
        log_probs_all = torch.log_softmax(out.logits[0].double(), dim=-1)
        ids = enc["input_ids"][0]
        piece_log_probs = log_probs_all[torch.arange(ids.shape[0]), ids]

        # attention received per position, averaged over layers x heads x queries
        stacked = torch.stack([a[0].double() for a in out.attentions])  # L,H,T,T
        received = stacked.mean(dim=(0, 1, 2))  # (T,)
        kept_idx = [i for i, k in enumerate(keep) if k]
        if not kept_idx:
            raise AlignmentError("sentence has no scoreable tokens")
        kept_mean = float(received[kept_idx].mean())
        if kept_mean <= 0.0:
            raise AlignmentError("attention mass vanished")
        alpha = (received / kept_mean).tolist()

        try:
            groups = group_pieces(text, offsets, keep)
        except LookupError as exc:
            raise AlignmentError(str(exc)) from exc
        if not groups:
            raise AlignmentError("no word groups after aggregation")
        word_log_probs, word_attentions = aggregate_pieces(
            piece_log_probs.tolist(), alpha, groups)
        words = [
            text[offsets[group[0]][0]:offsets[group[-1]][1]]
            for group in groups
        ]
        # guard the wire contract: log-probabilities never positive
        word_log_probs = [min(lp, 0.0) for lp in word_log_probs]
        return {
            "tokens": words,
            "log_probs": word_log_probs,
            "attentions": word_attentions,
        }

    @torch.inference_mode()
    def fill_mask(self, text: str, mask_index: int, top_k: int) -> Dict:
        if top_k < 1:
            raise BadRequest("top_k must be >= 1")
        mask_token = self.tokenizer.mask_token
        if mask_token != MASK_MARKER:
            text = text.replace(MASK_MARKER, mask_token)
        enc, offsets, _ = self._encode(text)
        ids = enc["input_ids"][0]
        positions = (ids == self.tokenizer.mask_token_id).nonzero(as_tuple=True)[0]
        if positions.numel() != 1:
            raise BadRequest(
                f"expected exactly one {MASK_MARKER} in text, found {positions.numel()}")
        position = int(positions[0])
        found_chunk = chunk_index(text, offsets[position][0])
        if found_chunk != mask_index:
            raise BadRequest(
                f"mask_index {mask_index} does not match the masked slot "
                f"(chunk {found_chunk})")
        out = self.model(**enc)
        probs = torch.softmax(out.logits[0, position].double(), dim=-1)
        special = set(self.tokenizer.all_special_ids)
        order = torch.argsort(probs, descending=True, stable=True)
        predictions = []
        for token_id in order.tolist():
            if token_id in special:
                continue
            token = self.tokenizer.convert_ids_to_tokens(token_id)
            if token.startswith("##"):  # continuation pieces are not words
                continue
            predictions.append({"token": token, "prob": float(probs[token_id])})
            if len(predictions) == top_k:
                break
        return {"predictions": predictions}

    @torch.inference_mode()
    def embed(self, text: str) -> Dict:
        enc, _, keep = self._encode(text)
        out = self.model(**enc, output_hidden_states=True)
        final = out.hidden_states[-1][0].double()
        kept_idx = [i for i, k in enumerate(keep) if k]
        if not kept_idx:
            raise AlignmentError("sentence has no embeddable tokens")
        vector = final[kept_idx].mean(dim=0)
        return {"vector": vector.tolist()}
