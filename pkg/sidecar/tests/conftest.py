import pytest


@pytest.fixture(scope="session")
def tiny_encoder_dir(tmp_path_factory):
    """A locally materialized 768-hidden encoder for offline tests.

    Seeded random init: tiny, deterministic, and structurally identical
    to a real pre-trained checkpoint directory.
    """
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    path = tmp_path_factory.mktemp("tiny_encoder")
    words = (
        "the a an and of to in on at boy girl mother water cookie jar stool "
        "sink dish dishes floor kitchen window curtain falls washing spills "
        "reaches laughing hand lid shelf counter over behind beside about"
    ).split()
    vocab = (
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
        + list("abcdefghijklmnopqrstuvwxyz")
        + ["##" + c for c in "abcdefghijklmnopqrstuvwxyz"]
        + words
    )
    (path / "vocab.txt").write_text("\n".join(vocab), encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(path / "vocab.txt"), do_lower_case=True)
    tokenizer.save_pretrained(path)

    torch.manual_seed(20240917)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=768,
        num_hidden_layers=1,
        num_attention_heads=4,
        intermediate_size=128,
        max_position_embeddings=64,
    )
    BertModel(config).save_pretrained(path)
    return path
