//! The fixed, versioned feature layout.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Number of features in a vector.
pub const ALPHA: usize = 58;

/// Leading features used for prototype similarity: everything except the
/// symbolic-sequence indicators and the prototype features themselves.
pub const BASE_DIMS: usize = 43;

pub const TOP_GRAM_OFFSET: usize = 43;
pub const TOP_GRAMS: usize = 5;
pub const PROTOTYPE_OFFSET: usize = 48;
pub const PROTOTYPE_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureFamily {
    Meme,
    User,
    Content,
    Network,
    Hashtag,
    Dormancy,
    Poly,
    Derivative,
    TopGram,
    Prototype,
}

impl FeatureFamily {
    pub fn width(self) -> usize {
        match self {
            FeatureFamily::Meme => 8,
            FeatureFamily::User => 3,
            FeatureFamily::Content => 5,
            FeatureFamily::Network => 4,
            FeatureFamily::Hashtag => 3,
            FeatureFamily::Dormancy => 2,
            FeatureFamily::Poly => 7,
            FeatureFamily::Derivative => 11,
            FeatureFamily::TopGram => 5,
            FeatureFamily::Prototype => 10,
        }
    }
}

pub const FAMILIES: [FeatureFamily; 10] = [
    FeatureFamily::Meme,
    FeatureFamily::User,
    FeatureFamily::Content,
    FeatureFamily::Network,
    FeatureFamily::Hashtag,
    FeatureFamily::Dormancy,
    FeatureFamily::Poly,
    FeatureFamily::Derivative,
    FeatureFamily::TopGram,
    FeatureFamily::Prototype,
];

pub const FEATURE_NAMES: [&str; ALPHA] = [
    "tweet_count",
    "author_count",
    "retweet_count",
    "mention_count",
    "url_ratio",
    "author_ratio",
    "retweet_ratio",
    "mention_ratio",
    "total_followers",
    "max_followers",
    "mean_passivity",
    "special_signal_tweets",
    "avg_pos_score",
    "avg_neg_score",
    "happy_emoticon_tweets",
    "sad_emoticon_tweets",
    "graph_order",
    "graph_density",
    "graph_average_degree",
    "graph_degree_entropy",
    "hashtag_length",
    "case_variants",
    "cooccurrence_tweets",
    "dormant_minutes",
    "bursting_minutes",
    "poly_w0",
    "poly_w1",
    "poly_w2",
    "poly_w3",
    "poly_w4",
    "poly_w5",
    "poly_w6",
    "mean_value",
    "std_value",
    "d_last_first",
    "d_last_max",
    "d_last_min",
    "idx_max",
    "mean_fod",
    "std_fod",
    "last_fod",
    "max_fod",
    "d_pfod_nfod",
    "top_gram_1",
    "top_gram_2",
    "top_gram_3",
    "top_gram_4",
    "top_gram_5",
    "prototype_k1",
    "prototype_k2",
    "prototype_k3",
    "prototype_k4",
    "prototype_k5",
    "prototype_k6",
    "prototype_k7",
    "prototype_k8",
    "prototype_k9",
    "prototype_k10",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaEntry {
    pub index: usize,
    pub name: String,
    pub family: FeatureFamily,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaDocument {
    pub schema_version: u32,
    pub features: Vec<SchemaEntry>,
}

pub fn schema_document() -> SchemaDocument {
    let mut features = Vec::with_capacity(ALPHA);
    for family in FAMILIES {
        for _ in 0..family.width() {
            let index = features.len();
            features.push(SchemaEntry {
                index,
                name: FEATURE_NAMES[index].to_string(),
                family,
            });
        }
    }
    SchemaDocument {
        schema_version: SCHEMA_VERSION,
        features,
    }
}
