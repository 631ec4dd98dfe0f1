//! Bernoulli activation of light sources.

use std::collections::BTreeMap;

use rand::Rng;

use super::lights::LightInstance;
use crate::error::{Error, Result};
use crate::rng::KeyedRng;

const TAG_GROUP: u64 = 0;
const TAG_SINGLE: u64 = 1;

/// Which instances are switched on for one seed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActivationDraw {
    active: BTreeMap<u32, bool>,
}

impl ActivationDraw {
    /// Every listed instance switched on or off.
    pub fn uniform(lights: &[LightInstance], on: bool) -> Self {
        Self {
            active: lights.iter().map(|l| (l.instance_id, on)).collect(),
        }
    }

    pub fn is_active(&self, instance_id: u32) -> bool {
        self.active.get(&instance_id).copied().unwrap_or(false)
    }

    pub fn active_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.active.iter().filter(|(_, &on)| on).map(|(&id, _)| id)
    }

    pub fn active_count(&self) -> usize {
        self.active.values().filter(|&&on| on).count()
    }
}

/// Activation probability of each group: taken from the group-class record
/// when there is one, otherwise all members must agree.
pub fn group_probabilities(lights: &[LightInstance]) -> Result<BTreeMap<u32, f64>> {
    let mut from_record: BTreeMap<u32, f64> = BTreeMap::new();
    let mut from_members: BTreeMap<u32, f64> = BTreeMap::new();
    for l in lights {
        let Some(g) = l.group_id else { continue };
        if l.class.is_group() {
            if from_record.insert(g, l.activation_p).is_some() {
                return Err(Error::Light(format!("group {g} has more than one group record")));
            }
        } else if let Some(&p) = from_members.get(&g) {
            if p != l.activation_p {
                from_members.insert(g, f64::NAN);
            }
        } else {
            from_members.insert(g, l.activation_p);
        }
    }
    for (g, p) in from_members {
        if from_record.contains_key(&g) {
            continue;
        }
        if p.is_nan() {
            return Err(Error::Light(format!(
                "members of group {g} disagree on p and there is no group record"
            )));
        }
        from_record.insert(g, p);
    }
    Ok(from_record)
}

/// One draw per group keyed by `(seed, group_id)`, one per ungrouped
/// instance keyed by `(seed, instance_id)`; members inherit their group's draw.
pub fn draw_activations(lights: &[LightInstance], seed: u64) -> Result<ActivationDraw> {
    for l in lights {
        l.validate()?;
    }
    let probs = group_probabilities(lights)?;
    let groups: BTreeMap<u32, bool> = probs
        .iter()
        .map(|(&g, &p)| (g, bernoulli(seed, TAG_GROUP, g as u64, p)))
        .collect();
    let active = lights
        .iter()
        .map(|l| {
            let on = match l.group_id {
                Some(g) => groups[&g],
                None => bernoulli(seed, TAG_SINGLE, l.instance_id as u64, l.activation_p),
            };
            (l.instance_id, on)
        })
        .collect();
    Ok(ActivationDraw { active })
}

fn bernoulli(seed: u64, tag: u64, id: u64, p: f64) -> bool {
    if p >= 1.0 {
        return true;
    }
    let mut rng = KeyedRng::new(seed, &[tag, id]);
    rng.random::<f64>() < p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::LightClass;

    fn light(id: u32, group: Option<u32>, p: f64, class: LightClass) -> LightInstance {
        LightInstance {
            instance_id: id,
            class,
            mask: None,
            group_id: group,
            chromaticity: [1.0, 1.0],
            strength: 1.0,
            activation_p: p,
        }
    }

    #[test]
    fn extremes() {
        let lights: Vec<_> = (1..6).map(|i| light(i, Some(i % 2), 1.0, LightClass::WindowBuilding)).collect();
        for seed in 0..50 {
            assert_eq!(draw_activations(&lights, seed).unwrap().active_count(), 5);
        }
        let off: Vec<_> = lights.iter().map(|l| LightInstance { activation_p: 0.0, ..l.clone() }).collect();
        for seed in 0..50 {
            assert_eq!(draw_activations(&off, seed).unwrap().active_count(), 0);
        }
    }

    #[test]
    fn group_record_overrides_members() {
        let lights = vec![
            light(1, Some(3), 0.0, LightClass::ParkedFront),
            light(2, Some(3), 1.0, LightClass::ParkedRear),
            light(9, Some(3), 1.0, LightClass::CarGroup),
        ];
        let d = draw_activations(&lights, 42).unwrap();
        assert!(d.is_active(1) && d.is_active(2));
        assert!(draw_activations(&lights[..2], 42).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let lights: Vec<_> = (1..20).map(|i| light(i, None, 0.5, LightClass::Clock)).collect();
        assert_eq!(draw_activations(&lights, 7).unwrap(), draw_activations(&lights, 7).unwrap());
        assert_ne!(draw_activations(&lights, 7).unwrap(), draw_activations(&lights, 8).unwrap());
    }
}
