//! Semantic label conventions and the inactive light-source taxonomy.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Cityscapes train-ID label names, indexed by ID.
pub const CITYSCAPES_CLASSES: [&str; 19] = [
    "road",
    "sidewalk",
    "building",
    "wall",
    "fence",
    "pole",
    "traffic light",
    "traffic sign",
    "vegetation",
    "terrain",
    "sky",
    "person",
    "rider",
    "car",
    "truck",
    "bus",
    "train",
    "motorcycle",
    "bicycle",
];

/// Train ID of unlabeled pixels.
pub const IGNORE_LABEL: u8 = 255;

pub mod label {
    pub const ROAD: u8 = 0;
    pub const SIDEWALK: u8 = 1;
    pub const BUILDING: u8 = 2;
    pub const POLE: u8 = 5;
    pub const TRAFFIC_LIGHT: u8 = 6;
    pub const TRAFFIC_SIGN: u8 = 7;
    pub const SKY: u8 = 10;
    pub const PERSON: u8 = 11;
    pub const CAR: u8 = 13;
}

/// Vehicles, persons, poles, traffic lights and traffic signs.
pub fn default_foreground_classes() -> Vec<u8> {
    vec![5, 6, 7, 11, 12, 13, 14, 15, 16, 17, 18]
}

pub fn is_known_label(id: u8) -> bool {
    (id as usize) < CITYSCAPES_CLASSES.len() || id == IGNORE_LABEL
}

/// Broad category of an inactive light source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LightCategory {
    Building,
    Vehicle,
    Object,
    Group,
}

/// The 21 inactive light-source classes; discriminants are the class numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum LightClass {
    WindowBuilding = 1,
    WindowParked = 2,
    ParkedFront = 3,
    ParkedRear = 4,
    MovingFront = 5,
    MovingRear = 6,
    WindowTransport = 7,
    StreetLightHt = 8,
    StreetLightLt = 9,
    Advertisement = 10,
    Clock = 11,
    Inferred = 12,
    WindowsGroup = 13,
    CarGroup = 14,
    TruckGroup = 15,
    BusGroup = 16,
    BicycleGroup = 17,
    MotorcycleGroup = 18,
    TrainGroup = 19,
    TrafficLightGroup = 20,
    TrafficSignGroup = 21,
}

impl LightClass {
    pub const ALL: [LightClass; 21] = [
        LightClass::WindowBuilding,
        LightClass::WindowParked,
        LightClass::ParkedFront,
        LightClass::ParkedRear,
        LightClass::MovingFront,
        LightClass::MovingRear,
        LightClass::WindowTransport,
        LightClass::StreetLightHt,
        LightClass::StreetLightLt,
        LightClass::Advertisement,
        LightClass::Clock,
        LightClass::Inferred,
        LightClass::WindowsGroup,
        LightClass::CarGroup,
        LightClass::TruckGroup,
        LightClass::BusGroup,
        LightClass::BicycleGroup,
        LightClass::MotorcycleGroup,
        LightClass::TrainGroup,
        LightClass::TrafficLightGroup,
        LightClass::TrafficSignGroup,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get((id as usize).wrapping_sub(1)).copied()
    }

    pub fn name(self) -> &'static str {
        use LightClass::*;
        match self {
            WindowBuilding => "window_building",
            WindowParked => "window_parked",
            ParkedFront => "parked_front",
            ParkedRear => "parked_rear",
            MovingFront => "moving_front",
            MovingRear => "moving_rear",
            WindowTransport => "window_transport",
            StreetLightHt => "street_light_HT",
            StreetLightLt => "street_light_LT",
            Advertisement => "advertisement",
            Clock => "clock",
            Inferred => "inferred",
            WindowsGroup => "windows_group",
            CarGroup => "car_group",
            TruckGroup => "truck_group",
            BusGroup => "bus_group",
            BicycleGroup => "bicycle_group",
            MotorcycleGroup => "motorcycle_group",
            TrainGroup => "train_group",
            TrafficLightGroup => "traffic_light_group",
            TrafficSignGroup => "traffic_sign_group",
        }
    }

    pub fn category(self) -> LightCategory {
        match self.id() {
            1 => LightCategory::Building,
            2..=7 => LightCategory::Vehicle,
            8..=12 => LightCategory::Object,
            _ => LightCategory::Group,
        }
    }

    /// Group classes only bind member instances; they never emit themselves.
    pub fn is_group(self) -> bool {
        self.category() == LightCategory::Group
    }
}

impl fmt::Display for LightClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LightClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Light(format!("unknown light class '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taxonomy_round_trips() {
        for (i, c) in LightClass::ALL.iter().enumerate() {
            assert_eq!(c.id() as usize, i + 1);
            assert_eq!(LightClass::from_id(c.id()), Some(*c));
            assert_eq!(c.name().parse::<LightClass>().unwrap(), *c);
        }
        assert_eq!(LightClass::from_id(0), None);
        assert_eq!(LightClass::from_id(22), None);
    }

    #[test]
    fn categories() {
        assert_eq!(LightClass::WindowBuilding.category(), LightCategory::Building);
        assert_eq!(LightClass::WindowTransport.category(), LightCategory::Vehicle);
        assert_eq!(LightClass::Inferred.category(), LightCategory::Object);
        assert!(LightClass::WindowsGroup.is_group());
        assert!(LightClass::TrafficSignGroup.is_group());
        assert!(!LightClass::Clock.is_group());
    }

    #[test]
    fn known_labels() {
        assert!(is_known_label(0));
        assert!(is_known_label(18));
        assert!(is_known_label(IGNORE_LABEL));
        assert!(!is_known_label(19));
    }
}
