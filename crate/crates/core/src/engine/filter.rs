use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::string_enum;

/// Drilldown group for records that carry no value for the dimension.
pub const UNASSIGNED: &str = "(unassigned)";

string_enum! {
    pub enum Dimension: "dimension" {
        Department => "department",
        Doctor => "doctor",
        Location => "location",
        Drg => "drg",
        Organ => "organ",
    }
}

/// A set of dimensions, as a bitmask over [`Dimension::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DimSet(u8);

impl DimSet {
    pub const NONE: DimSet = DimSet(0);
    pub const ALL: DimSet = DimSet(0b11111);

    pub const fn of(dims: &[Dimension]) -> DimSet {
        let mut bits = 0u8;
        let mut i = 0;
        while i < dims.len() {
            bits |= 1 << dims[i] as u8;
            i += 1;
        }
        DimSet(bits)
    }

    pub fn contains(self, d: Dimension) -> bool {
        self.0 & (1 << d as u8) != 0
    }

    pub fn intersect(self, other: DimSet) -> DimSet {
        DimSet(self.0 & other.0)
    }

    pub fn is_superset(self, other: DimSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn iter(self) -> impl Iterator<Item = Dimension> {
        Dimension::ALL
            .iter()
            .copied()
            .filter(move |d| self.contains(*d))
    }
}

/// Values a record holds for each dimension. `None` means the record has no
/// value, which matches only the [`UNASSIGNED`] group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DimValues<'a> {
    pub department: Option<&'a str>,
    pub doctor: Option<&'a str>,
    pub location: Option<&'a str>,
    pub drg: Option<&'a str>,
    pub organ: Option<&'a str>,
}

impl<'a> DimValues<'a> {
    pub fn get(&self, d: Dimension) -> Option<&'a str> {
        match d {
            Dimension::Department => self.department,
            Dimension::Doctor => self.doctor,
            Dimension::Location => self.location,
            Dimension::Drg => self.drg,
            Dimension::Organ => self.organ,
        }
    }
}

/// Equality constraints on at most one value per dimension.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DimensionFilter {
    constraints: BTreeMap<Dimension, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("dimension {0} is already constrained")]
pub struct DuplicateConstraint(pub Dimension);

impl DimensionFilter {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with(
        mut self,
        d: Dimension,
        value: impl Into<String>,
    ) -> Result<Self, DuplicateConstraint> {
        if self.constraints.contains_key(&d) {
            return Err(DuplicateConstraint(d));
        }
        self.constraints.insert(d, value.into());
        Ok(self)
    }

    pub fn get(&self, d: Dimension) -> Option<&str> {
        self.constraints.get(&d).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn dims(&self) -> DimSet {
        DimSet::of(&self.constraints.keys().copied().collect::<Vec<_>>())
    }

    pub fn iter(&self) -> impl Iterator<Item = (Dimension, &str)> {
        self.constraints.iter().map(|(d, v)| (*d, v.as_str()))
    }

    pub fn matches(&self, values: &DimValues<'_>) -> bool {
        self.constraints
            .iter()
            .all(|(d, want)| values.get(*d).unwrap_or(UNASSIGNED) == want.as_str())
    }
}

impl Serialize for DimensionFilter {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.constraints.len()))?;
        for (d, v) in &self.constraints {
            map.serialize_entry(d.as_str(), v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for DimensionFilter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let constraints = BTreeMap::<Dimension, String>::deserialize(deserializer)?;
        Ok(DimensionFilter { constraints })
    }
}
