from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .flow import (
    DECODER_VERSION,
    DecoderConfig,
    VelocityNetwork,
    ctf_loss,
    decode,
    decode_batch,
    interpolate,
    load_decoder,
    save_decoder,
    velocity_target,
)
from .fsq import (
    DEFAULT_FSQ_LEVELS,
    FSQ,
    code_to_index,
    fsq_quantize,
    index_to_code,
    vocab_size,
)
from .tokenizer import (
    TOKENIZER_VERSION,
    TokenizerConfig,
    TokenizerEncoder,
    encode,
    encode_batch,
    load_tokenizer,
    save_tokenizer,
)
from .tokens import TokenSequence, prefix
from .train import TrainingDiverged, reduce_all_levels, train_stage1, train_stage2
from .var import (
    VAR_VERSION,
    BlockLayout,
    VarConfig,
    VarTransformer,
    block_causal_mask,
    generate_tokens,
    load_var,
    sample_block,
    save_var,
    var_loss,
)
