use crate::{Error, Result, Warning};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockStage {
    Down,
    Middle,
    Up,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnetBlock {
    pub id: String,
    pub stage: BlockStage,
    /// Spatial side length of the feature map at this block.
    pub resolution: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnetSpec {
    blocks: Vec<UnetBlock>,
}

impl UnetSpec {
    pub fn new(blocks: Vec<UnetBlock>) -> Result<Self> {
        let middles = blocks.iter().filter(|b| b.stage == BlockStage::Middle).count();
        if middles != 1 {
            return Err(Error::InvalidInput(format!("UNet needs exactly one middle block, found {middles}")));
        }
        let mut ids = BTreeSet::new();
        if let Some(dup) = blocks.iter().find(|b| !ids.insert(&b.id)) {
            return Err(Error::InvalidInput(format!("duplicate block id {}", dup.id)));
        }
        Ok(Self { blocks })
    }

    /// Three down stages, one middle block and three up stages, halving the
    /// resolution at each down stage from `latent`.
    pub fn three_level(latent: u32) -> Self {
        let levels = [latent, latent / 2, latent / 4];
        let mut blocks: Vec<UnetBlock> = levels
            .iter()
            .enumerate()
            .map(|(i, &r)| UnetBlock { id: format!("down.{i}"), stage: BlockStage::Down, resolution: r })
            .collect();
        blocks.push(UnetBlock { id: "mid".into(), stage: BlockStage::Middle, resolution: levels[2] });
        blocks.extend(levels.iter().rev().enumerate().map(|(i, &r)| UnetBlock {
            id: format!("up.{i}"),
            stage: BlockStage::Up,
            resolution: r,
        }));
        Self { blocks }
    }

    pub fn blocks(&self) -> &[UnetBlock] {
        &self.blocks
    }
}

/// Blocks that receive layout control: the middle block and every up block
/// at the lowest up-stage resolution.
pub fn dlc_blocks(spec: &UnetSpec) -> (BTreeSet<String>, Vec<Warning>) {
    let mut selected = BTreeSet::new();
    let mut warnings = Vec::new();
    selected.extend(spec.blocks.iter().filter(|b| b.stage == BlockStage::Middle).map(|b| b.id.clone()));
    let lowest = spec.blocks.iter().filter(|b| b.stage == BlockStage::Up).map(|b| b.resolution).min();
    match lowest {
        Some(res) => selected.extend(
            spec.blocks
                .iter()
                .filter(|b| b.stage == BlockStage::Up && b.resolution == res)
                .map(|b| b.id.clone()),
        ),
        None => warnings.push(Warning::NoUpBlocks),
    }
    (selected, warnings)
}

/// Record of how layout-control layers would be trained. Descriptive only:
/// nothing in this crate trains weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingDescriptor {
    pub deep_layer_control: bool,
    /// Rank of low-rank adapters added to the UNet, if any.
    pub lora_rank: Option<u32>,
    pub phases: Vec<TrainingPhase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPhase {
    pub resolution: u32,
    pub steps: u32,
    pub learning_rate: f64,
}

impl Default for TrainingDescriptor {
    fn default() -> Self {
        Self {
            deep_layer_control: true,
            lora_rank: Some(64),
            phases: vec![
                TrainingPhase { resolution: 512, steps: 20_000, learning_rate: 5e-5 },
                TrainingPhase { resolution: 1024, steps: 20_000, learning_rate: 2e-5 },
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(id: &str, stage: BlockStage, resolution: u32) -> UnetBlock {
        UnetBlock { id: id.into(), stage, resolution }
    }

    #[test]
    fn picks_lowest_up_level() {
        let spec = UnetSpec::new(vec![
            block("mid", BlockStage::Middle, 32),
            block("u128", BlockStage::Up, 128),
            block("u32", BlockStage::Up, 32),
            block("u64", BlockStage::Up, 64),
        ])
        .unwrap();
        let (sel, warn) = dlc_blocks(&spec);
        assert_eq!(sel, BTreeSet::from(["mid".to_string(), "u32".to_string()]));
        assert!(warn.is_empty());
    }

    #[test]
    fn single_up_level_and_no_up() {
        let one = UnetSpec::new(vec![block("m", BlockStage::Middle, 8), block("u", BlockStage::Up, 16)]).unwrap();
        assert_eq!(dlc_blocks(&one).0.len(), 2);
        let none = UnetSpec::new(vec![block("d", BlockStage::Down, 16), block("m", BlockStage::Middle, 8)]).unwrap();
        let (sel, warn) = dlc_blocks(&none);
        assert_eq!(sel, BTreeSet::from(["m".to_string()]));
        assert_eq!(warn, vec![Warning::NoUpBlocks]);
    }

    #[test]
    fn three_level_topology() {
        let spec = UnetSpec::three_level(128);
        // brute-force the predicate over the enumerated blocks
        let up_min = spec.blocks().iter().filter(|b| b.stage == BlockStage::Up).map(|b| b.resolution).min().unwrap();
        let expected: BTreeSet<String> = spec
            .blocks()
            .iter()
            .filter(|b| b.stage == BlockStage::Middle || (b.stage == BlockStage::Up && b.resolution == up_min))
            .map(|b| b.id.clone())
            .collect();
        let (sel, _) = dlc_blocks(&spec);
        assert_eq!(sel, expected);
        assert_eq!(sel, BTreeSet::from(["mid".to_string(), "up.0".to_string()]));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(UnetSpec::new(vec![block("u", BlockStage::Up, 8)]).is_err());
        assert!(UnetSpec::new(vec![block("m", BlockStage::Middle, 8), block("m", BlockStage::Up, 8)]).is_err());
    }
}
