use super::OcclusionClass;
use crate::{Error, Result};

const NO_OCC_CLAUSE: &str = "The bounding boxes of taglines should never occlude the subject.";
const ALLOW_OCC_CLAUSE: &str = "The bounding boxes of taglines are allowed to occlude the subject.";

/// Class-conditioned occlusion sentence passed to the layout generator.
pub fn cclp_condition(class: &OcclusionClass) -> Result<String> {
    let product = class.product_class();
    if product.trim().is_empty() {
        return Err(Error::InvalidInput("product class must be non-empty".into()));
    }
    let clause = if class.allows_occlusion() { ALLOW_OCC_CLAUSE } else { NO_OCC_CLAUSE };
    Ok(format!("The class of subject is {product}. {clause}"))
}
