from .fusion import apply_consistency, merge, unmerge
from .hooks import ConsistencyHook, SiteInvocation, attention_hook
from .matching import active_kernel, match_top_n, partition, patch_similarity
from .types import MatchMap, PatchSet, SimilarityConfig, TokenSet

__all__ = [
    "ConsistencyHook",
    "MatchMap",
    "PatchSet",
    "SimilarityConfig",
    "SiteInvocation",
    "TokenSet",
    "active_kernel",
    "apply_consistency",
    "attention_hook",
    "match_top_n",
    "merge",
    "partition",
    "patch_similarity",
    "unmerge",
]
