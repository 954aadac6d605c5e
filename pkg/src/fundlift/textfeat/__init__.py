from .dictionaries import (
    CategoryDictionary,
    ValenceLexicon,
    load_category_dictionary,
    load_valence_lexicon,
    load_word_list,
)
from .features import (
    TEXT_GROUP,
    LexiconFeatureExtractor,
    TextFeatureVector,
    TextResources,
    category_percentages,
    emotion_and_polarity,
    extract_lexicon_features,
    flags,
    lexicon_mean,
    load_text_resources,
    readability,
)
from .syllables import count_syllables, total_syllables
from .tokenize import TokenizedText, sentence_texts, tokenize

__all__ = [
    "CategoryDictionary",
    "ValenceLexicon",
    "load_category_dictionary",
    "load_valence_lexicon",
    "load_word_list",
    "TEXT_GROUP",
    "LexiconFeatureExtractor",
    "TextFeatureVector",
    "TextResources",
    "category_percentages",
    "emotion_and_polarity",
    "extract_lexicon_features",
    "flags",
    "lexicon_mean",
    "load_text_resources",
    "readability",
    "count_syllables",
    "total_syllables",
    "TokenizedText",
    "sentence_texts",
    "tokenize",
]
