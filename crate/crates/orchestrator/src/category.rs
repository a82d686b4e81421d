use craft_physics::Function;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Hammer,
    Bookshelf,
    Chair,
    Table,
    Bus,
    Scooter,
    Skateboard,
    Truck,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Hammer,
        Category::Bookshelf,
        Category::Chair,
        Category::Table,
        Category::Bus,
        Category::Scooter,
        Category::Skateboard,
        Category::Truck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Hammer => "Hammer",
            Category::Bookshelf => "Bookshelf",
            Category::Chair => "Chair",
            Category::Table => "Table",
            Category::Bus => "Bus",
            Category::Scooter => "Scooter",
            Category::Skateboard => "Skateboard",
            Category::Truck => "Truck",
        }
    }

    /// File stem used under the templates directory.
    pub fn slug(self) -> &'static str {
        match self {
            Category::Hammer => "hammer",
            Category::Bookshelf => "bookshelf",
            Category::Chair => "chair",
            Category::Table => "table",
            Category::Bus => "bus",
            Category::Scooter => "scooter",
            Category::Skateboard => "skateboard",
            Category::Truck => "truck",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        let s = s.trim().to_ascii_lowercase();
        let s = match s.as_str() {
            "shelves" | "shelf" | "bookshelves" => "bookshelf",
            other => other,
        };
        Category::ALL.into_iter().find(|c| c.slug() == s)
    }

    /// The function every image of this category is tested for.
    pub fn function(self) -> Function {
        match self {
            Category::Hammer => Function::Hit,
            Category::Bookshelf | Category::Chair | Category::Table => Function::Support,
            Category::Bus | Category::Scooter | Category::Skateboard | Category::Truck => Function::Rolling,
        }
    }
}
