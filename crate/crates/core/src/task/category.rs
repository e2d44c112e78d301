use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The six semantic object categories; each has exactly one bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Dishes,
    Toys,
    Books,
    Laundry,
    OfficeSupplies,
    Recycling,
}

impl Category {
    /// Fixed order used for round-robin assignment of pool points.
    pub const ALL: [Category; 6] = [
        Category::Dishes,
        Category::Toys,
        Category::Books,
        Category::Laundry,
        Category::OfficeSupplies,
        Category::Recycling,
    ];

    pub const COUNT: usize = Self::ALL.len();

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Dishes => "dishes",
            Category::Toys => "toys",
            Category::Books => "books",
            Category::Laundry => "laundry",
            Category::OfficeSupplies => "office_supplies",
            Category::Recycling => "recycling",
        }
    }

    pub fn bin_label(self) -> &'static str {
        match self {
            Category::Dishes => "dish bin",
            Category::Toys => "toy box",
            Category::Books => "bookshelf",
            Category::Laundry => "laundry hamper",
            Category::OfficeSupplies => "office-supply box",
            Category::Recycling => "recycling bin",
        }
    }

    /// Object models a point of this category can be rendered as.
    pub fn models(self) -> &'static [&'static str] {
        match self {
            Category::Dishes => &["plate", "bowl", "mug", "cup", "frying pan", "serving tray"],
            Category::Toys => &["teddy bear", "toy car", "rubber duck", "building blocks", "toy robot"],
            Category::Books => &["novel", "cookbook", "magazine", "atlas", "comic book"],
            Category::Laundry => &["sock", "t-shirt", "towel", "sweater", "pair of jeans"],
            Category::OfficeSupplies => &["stapler", "notebook", "pen cup", "tape dispenser", "calculator"],
            Category::Recycling => &["soda can", "cardboard box", "water bottle", "newspaper", "glass jar"],
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}
