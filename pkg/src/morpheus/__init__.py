"""Pattern-constrained music generation guided by tonal tension."""
from .estimators import Morpheus, PatternDiscoverer, TensionProfiler
from .optimizer import Assignment, MorphProblem, SearchTrace, build_problem, objective, vns
from .patterns import Cover, Tec, cosiatec, decode_tec, encode_tec, sia, siatec, siatec_compress
from .score import NoteEvent, Piece, parse_midi, parse_pointset_text, to_pointset, write_midi
from .spiral import KeyRep, SpelledPitch, global_key, key_position
from .tension import TensionProfile, profile, profile_distance

__all__ = [
    "Assignment", "Cover", "KeyRep", "MorphProblem", "Morpheus", "NoteEvent",
    "PatternDiscoverer", "Piece", "SearchTrace", "SpelledPitch", "Tec", "TensionProfile",
    "TensionProfiler", "build_problem", "cosiatec", "decode_tec", "encode_tec", "global_key",
    "key_position", "objective", "parse_midi", "parse_pointset_text", "profile",
    "profile_distance", "sia", "siatec", "siatec_compress", "to_pointset", "vns", "write_midi",
]
__version__ = "0.1.0"
