use std::collections::BTreeMap;

use crate::index::Mask;

use super::instantiate::{InstantiationSet, SlotInfo};

/// A rectangle of tuples: one value set per slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MergedInstance {
    pub masks: Vec<Mask>,
}

impl MergedInstance {
    /// Number of tuples the rectangle covers.
    pub fn size(&self) -> u64 {
        self.masks.iter().map(|m| m.count_ones() as u64).product()
    }

    pub fn contains(&self, tuple: &[u8]) -> bool {
        self.masks
            .iter()
            .zip(tuple)
            .all(|(m, &v)| m & (1 << v) != 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergedRule {
    pub rule_id: String,
    pub slots: Vec<SlotInfo>,
    pub instances: Vec<MergedInstance>,
}

/// Collapses an instantiation set into value-range rectangles.
///
/// Instances that agree on every slot but one unlinked slot are merged into
/// a single instance whose slot carries the union of their values. Slots are
/// scanned in declaration order and instances in lexicographic order until
/// nothing merges. The result covers exactly the input tuples with pairwise
/// disjoint rectangles; it is not guaranteed to be a minimum cover.
pub fn merge_ranges(inst: &InstantiationSet) -> MergedRule {
    let mut instances: Vec<MergedInstance> = inst
        .tuples
        .iter()
        .map(|t| MergedInstance {
            masks: t.iter().map(|&v| 1u64 << v).collect(),
        })
        .collect();
    instances.sort();
    loop {
        let before = instances.len();
        for (s, slot) in inst.slots.iter().enumerate() {
            if slot.linked {
                continue;
            }
            let mut groups: BTreeMap<Vec<Mask>, Mask> = BTreeMap::new();
            for i in &instances {
                let mut key = i.masks.clone();
                key[s] = 0;
                *groups.entry(key).or_insert(0) |= i.masks[s];
            }
            instances = groups
                .into_iter()
                .map(|(mut masks, m)| {
                    masks[s] = m;
                    MergedInstance { masks }
                })
                .collect();
        }
        if instances.len() == before {
            break;
        }
    }
    instances.sort();
    MergedRule {
        rule_id: inst.rule_id.clone(),
        slots: inst.slots.clone(),
        instances,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slot(name: &str, linked: bool) -> SlotInfo {
        SlotInfo {
            feature: 0,
            feature_name: name.to_string(),
            var: None,
            allowed: 0b11,
            domain_size: 2,
            occurrences: vec![(1, 0)],
            linked,
        }
    }

    fn set(tuples: &[[u8; 2]], agr_linked: bool) -> InstantiationSet {
        InstantiationSet {
            rule_id: "r".into(),
            slots: vec![slot("agr", agr_linked), slot("sort", false)],
            tuples: tuples.iter().map(|t| t.to_vec()).collect(),
        }
    }

    #[test]
    fn merges_along_unlinked_slot() {
        // (sg,loc), (pl,loc) -> agr={sg,pl}, sort=loc
        let m = merge_ranges(&set(&[[0, 0], [1, 0]], false));
        assert_eq!(
            m.instances,
            vec![MergedInstance {
                masks: vec![0b11, 0b01]
            }]
        );
    }

    #[test]
    fn no_merge_when_two_slots_differ() {
        let m = merge_ranges(&set(&[[0, 0], [1, 1]], false));
        assert_eq!(m.instances.len(), 2);
    }

    #[test]
    fn full_grid_collapses_to_one() {
        let m = merge_ranges(&set(&[[0, 0], [0, 1], [1, 0], [1, 1]], false));
        assert_eq!(
            m.instances,
            vec![MergedInstance {
                masks: vec![0b11, 0b11]
            }]
        );
    }

    #[test]
    fn linked_slot_stays_split() {
        let m = merge_ranges(&set(&[[0, 0], [0, 1], [1, 0], [1, 1]], true));
        assert_eq!(
            m.instances,
            vec![
                MergedInstance {
                    masks: vec![0b01, 0b11]
                },
                MergedInstance {
                    masks: vec![0b10, 0b11]
                },
            ]
        );
    }
}
