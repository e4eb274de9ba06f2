use std::fmt;

/// Number of class ids, including background.
pub const CLASS_COUNT: usize = 11;

/// Number of foreground classes (six body parts and four furniture families).
pub const FOREGROUND_COUNT: usize = 10;

/// Per-pixel semantic class. Ids 0..=5 are human body parts, 6..=9 furniture,
/// 10 is the floor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum ObjectClass {
    Head = 0,
    Body = 1,
    UpperArm = 2,
    LowerArm = 3,
    Hand = 4,
    Legs = 5,
    Chair = 6,
    Plant = 7,
    Storage = 8,
    Table = 9,
    Background = 10,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; CLASS_COUNT] = [
        ObjectClass::Head,
        ObjectClass::Body,
        ObjectClass::UpperArm,
        ObjectClass::LowerArm,
        ObjectClass::Hand,
        ObjectClass::Legs,
        ObjectClass::Chair,
        ObjectClass::Plant,
        ObjectClass::Storage,
        ObjectClass::Table,
        ObjectClass::Background,
    ];

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn is_body_part(self) -> bool {
        (self as u8) <= ObjectClass::Legs as u8
    }

    pub fn is_furniture(self) -> bool {
        matches!(
            self,
            ObjectClass::Chair | ObjectClass::Plant | ObjectClass::Storage | ObjectClass::Table
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectClass::Head => "head",
            ObjectClass::Body => "body",
            ObjectClass::UpperArm => "upper-arm",
            ObjectClass::LowerArm => "lower-arm",
            ObjectClass::Hand => "hand",
            ObjectClass::Legs => "legs",
            ObjectClass::Chair => "chair",
            ObjectClass::Plant => "plant",
            ObjectClass::Storage => "storage",
            ObjectClass::Table => "table",
            ObjectClass::Background => "background",
        }
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Instance family placed by the scene sampler. A human instance carries all
/// six body-part classes; each furniture family maps to a single class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Human,
    Table,
    Chair,
    Plant,
    Storage,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::Human, Family::Table, Family::Chair, Family::Plant, Family::Storage];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The class rendered for furniture families; `None` for humans.
    pub fn furniture_class(self) -> Option<ObjectClass> {
        match self {
            Family::Human => None,
            Family::Table => Some(ObjectClass::Table),
            Family::Chair => Some(ObjectClass::Chair),
            Family::Plant => Some(ObjectClass::Plant),
            Family::Storage => Some(ObjectClass::Storage),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Human => "human",
            Family::Table => "table",
            Family::Chair => "chair",
            Family::Plant => "plant",
            Family::Storage => "storage",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for (i, c) in ObjectClass::ALL.iter().enumerate() {
            assert_eq!(c.id() as usize, i);
            assert_eq!(ObjectClass::from_id(i as u8), Some(*c));
        }
        assert_eq!(ObjectClass::from_id(11), None);
    }

    #[test]
    fn body_parts_are_contiguous_and_disjoint_from_furniture() {
        let parts: Vec<u8> = ObjectClass::ALL
            .iter()
            .filter(|c| c.is_body_part())
            .map(|c| c.id())
            .collect();
        assert_eq!(parts, vec![0, 1, 2, 3, 4, 5]);
        assert!(ObjectClass::ALL.iter().all(|c| !(c.is_body_part() && c.is_furniture())));
        assert!(!ObjectClass::Background.is_body_part());
        assert!(!ObjectClass::Background.is_furniture());
    }
}
