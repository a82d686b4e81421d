//! Prompt bundles and their rendering into chat messages.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use craft_core::catalog::{Catalog, ObjectShape};
use craft_core::plan::parse_plan;
use craft_physics::Function;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::category::Category;
use crate::heuristics::{CategoryHeuristics, Heuristics};
use crate::OrchestratorError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
    /// Image forwarded to the client as-is.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image: Option<PathBuf>,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Message {
        Message {
            role: Role::System,
            content: content.into(),
            image: None,
        }
    }

    pub fn user(content: impl Into<String>) -> Message {
        Message {
            role: Role::User,
            content: content.into(),
            image: None,
        }
    }

    pub fn assistant(content: impl Into<String>) -> Message {
        Message {
            role: Role::Assistant,
            content: content.into(),
            image: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PromptBundle {
    pub image: Option<PathBuf>,
    pub category: Category,
    pub function: Function,
    pub catalog_text: String,
    /// Example plan for the category.
    pub template: Value,
    pub heuristics: CategoryHeuristics,
}

impl PromptBundle {
    /// Checks that the template is itself a valid plan.
    pub fn new(
        category: Category,
        function: Function,
        image: Option<PathBuf>,
        catalog: &Catalog,
        template: Value,
        heuristics: &Heuristics,
    ) -> Result<PromptBundle, OrchestratorError> {
        if let Err(report) = parse_plan(&template, catalog) {
            return Err(OrchestratorError::Data(format!(
                "template for {} is not a valid plan: {}",
                category.slug(),
                serde_json::to_string(&report.errors).unwrap_or_default()
            )));
        }
        let heuristics = heuristics.for_category(category, &template);
        Ok(PromptBundle {
            image,
            category,
            function,
            catalog_text: render_catalog(catalog),
            template,
            heuristics,
        })
    }

    /// Bundle using the template shipped with the crate.
    pub fn bundled(
        category: Category,
        function: Function,
        image: Option<PathBuf>,
        catalog: &Catalog,
        heuristics: &Heuristics,
    ) -> Result<PromptBundle, OrchestratorError> {
        let template = serde_json::from_str(bundled_template(category)).expect("bundled template parses");
        PromptBundle::new(category, function, image, catalog, template, heuristics)
    }

    /// Bundle from the template directory and heuristics file.
    pub fn from_files(
        category: Category,
        function: Function,
        image: Option<PathBuf>,
        catalog: &Catalog,
        templates: &Path,
        heuristics: &Heuristics,
    ) -> Result<PromptBundle, OrchestratorError> {
        let path = templates.join(format!("{}.json", category.slug()));
        let template = serde_json::from_str(&crate::read(&path)?)
            .map_err(|e| OrchestratorError::Data(format!("{}: {e}", path.display())))?;
        PromptBundle::new(category, function, image, catalog, template, heuristics)
    }
}

pub fn bundled_template(category: Category) -> &'static str {
    match category {
        Category::Hammer => include_str!("../../../data/templates/hammer.json"),
        Category::Bookshelf => include_str!("../../../data/templates/bookshelf.json"),
        Category::Chair => include_str!("../../../data/templates/chair.json"),
        Category::Table => include_str!("../../../data/templates/table.json"),
        Category::Bus => include_str!("../../../data/templates/bus.json"),
        Category::Scooter => include_str!("../../../data/templates/scooter.json"),
        Category::Skateboard => include_str!("../../../data/templates/skateboard.json"),
        Category::Truck => include_str!("../../../data/templates/truck.json"),
    }
}

pub fn render_catalog(catalog: &Catalog) -> String {
    let mut out = String::new();
    for o in catalog.objects() {
        let _ = match o.shape {
            ObjectShape::Cuboid { dims } => writeln!(
                out,
                "- {}: cuboid, {} x {} x {} mm",
                o.id, dims[0], dims[1], dims[2]
            ),
            ObjectShape::Cylinder { radius, length } => {
                writeln!(out, "- {}: cylinder, radius {} mm, length {} mm", o.id, radius, length)
            }
        };
    }
    out
}

fn function_name(f: Function) -> &'static str {
    match f {
        Function::Hit => "hit",
        Function::Support => "support",
        Function::Rolling => "rolling",
    }
}

const SYSTEM: &str = "\
You design craft assemblies. Given a picture of an object, a list of available \
objects and a target function, you output an assembly plan that approximates the \
object using only the available objects, so that the result can perform the function.";

const FORMAT: &str = "\
Output format: a JSON list of parts and nothing else. Each part has:
- NAME: part type name + _ + numeral, e.g. WHEEL_1.
- AVAILABLE_OBJ: an id from the list of available objects.
- ORIENTATION: for a cuboid, its dimensions as [dim_x, dim_y, dim_z]; for a cylinder, \
one of FRONT_BACK, LEFT_RIGHT, TOP_BOTTOM (direction of its axis).
- MODIFICATIONS: list of holes. Each has NAME (HOLE_ + numeral), TYPE (HOLE), and \
ALIGN_X, ALIGN_Y, ALIGN_Z. On the hole's own axis use <A>_<B>_FULL, <A>_<B>_HALF or \
<B>_<A>_HALF for its direction and depth; on the other axes use FRONT/CENTER/BACK, \
RIGHT/CENTER/LEFT or HIGH/CENTER/LOW.
- CONNECTIONS: list of connections to other parts. Each has TO_PART, CONTACT_TYPE \
(SURFACE or INSERTED) and TYPE (FIXED or NON_FIXED). SURFACE also needs TO_FACE (the \
face of this part that touches TO_PART: TOP, BOTTOM, RIGHT, LEFT, FRONT, BACK) and \
ALIGN_X (FRONT/CENTER/BACK), ALIGN_Y (RIGHT/CENTER/LEFT), ALIGN_Z (TOP/CENTER/BOTTOM). \
INSERTED also needs TO_MODIFICATION, the hole of TO_PART this part goes into.
- EXEC_FUNCTION: true for the parts that perform the function.
Axes: X is FRONT-BACK, Y is RIGHT-LEFT, Z is TOP-BOTTOM. Dimensions are in millimetres.";

/// System and user messages for a first attempt.
pub fn build_prompt(bundle: &PromptBundle) -> Vec<Message> {
    let mut user = String::new();
    let _ = writeln!(
        user,
        "Object category: {}\nTarget function: {}\n",
        bundle.category.name(),
        function_name(bundle.function)
    );
    let _ = writeln!(user, "Available objects:\n{}", bundle.catalog_text);
    let _ = writeln!(
        user,
        "Template (a valid {} assembly; adapt it to the picture):\n{}\n",
        bundle.category.name().to_ascii_lowercase(),
        serde_json::to_string_pretty(&bundle.template).unwrap_or_default()
    );
    let minimal = bundle
        .heuristics
        .minimal_parts
        .iter()
        .map(|(k, n)| format!("\"{k}\": {n}"))
        .collect::<Vec<_>>()
        .join(",  ");
    let _ = writeln!(user, "Minimal set of parts: {{{minimal}}}");
    if let Some(c) = &bundle.heuristics.constraint {
        let _ = writeln!(user, "Constraint: {c}");
    }
    let _ = writeln!(
        user,
        "\nYou may change parameters, add parts or use a different mechanism if needed.\n\n{FORMAT}"
    );
    let mut msg = Message::user(user);
    msg.image = bundle.image.clone();
    vec![Message::system(SYSTEM), msg]
}
