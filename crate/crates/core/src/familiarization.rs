//! Part Familiarization view state: parts-list selection, context-view
//! opacities and the part shown in the Secondary Window.
//!
//! Camera state (rotate/move) is purely a UI concern and is not modelled.

use alloc::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assembly, PartNumber};

pub const FULL_OPACITY: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FamiliarizationError {
    #[error("part {0} is not in the assembly")]
    UnknownPart(PartNumber),
    #[error("dim opacity must lie strictly between 0 and 1")]
    InvalidDimOpacity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamiliarizationView {
    pub selection: Option<PartNumber>,
    pub opacity_map: BTreeMap<PartNumber, f64>,
    pub secondary_model: Option<PartNumber>,
    pub context_view_enabled: bool,
    /// Explicit trainee choice for the context-view toggle. `None` means the
    /// default: on while a part is selected.
    #[serde(default)]
    context_view_choice: Option<bool>,
}

impl FamiliarizationView {
    pub fn new(assembly: &Assembly) -> Self {
        Self {
            selection: None,
            opacity_map: assembly.part_numbers().map(|p| (p.clone(), FULL_OPACITY)).collect(),
            secondary_model: None,
            context_view_enabled: false,
            context_view_choice: None,
        }
    }

    /// Selects a part from the parts list. With context view on, the part is
    /// drawn at full opacity and every other part at `dim_opacity`.
    pub fn select_part(&mut self, part: &PartNumber, dim_opacity: f64) -> Result<(), FamiliarizationError> {
        if !self.opacity_map.contains_key(part) {
            return Err(FamiliarizationError::UnknownPart(part.clone()));
        }
        check_dim(dim_opacity)?;
        self.selection = Some(part.clone());
        self.secondary_model = Some(part.clone());
        self.refresh(dim_opacity);
        Ok(())
    }

    pub fn clear_selection(&mut self) {
        self.selection = None;
        self.secondary_model = None;
        self.refresh(FULL_OPACITY);
    }

    /// Turns context view on or off. The choice sticks across selections.
    pub fn set_context_view(&mut self, enabled: bool, dim_opacity: f64) -> Result<(), FamiliarizationError> {
        check_dim(dim_opacity)?;
        self.context_view_choice = Some(enabled);
        self.refresh(dim_opacity);
        Ok(())
    }

    pub fn opacity(&self, part: &PartNumber) -> Option<f64> {
        self.opacity_map.get(part).copied()
    }

    fn refresh(&mut self, dim_opacity: f64) {
        self.context_view_enabled = self.context_view_choice.unwrap_or(self.selection.is_some());
        let dimming = self.selection.as_ref().filter(|_| self.context_view_enabled);
        for (part, opacity) in self.opacity_map.iter_mut() {
            *opacity = match dimming {
                Some(selected) if selected != part => dim_opacity,
                _ => FULL_OPACITY,
            };
        }
    }
}

fn check_dim(dim_opacity: f64) -> Result<(), FamiliarizationError> {
    if dim_opacity > 0.0 && dim_opacity < 1.0 {
        Ok(())
    } else {
        Err(FamiliarizationError::InvalidDimOpacity)
    }
}
