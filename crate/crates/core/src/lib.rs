//! Executable behavior specifications for automated driving.
//!
//! A specification declares an operational domain (scene-entity classes,
//! an ego-relative zone grid), knowledge sources such as traffic-code
//! paragraphs, facts, maneuver options and positive Horn rules. Scenarios
//! place entities into zones. The engine grounds a scenario, infers the
//! applicable maneuver options by forward chaining and keeps the derivation
//! of every conclusion, so each maneuver can be traced back to the rules,
//! facts, entities and sources behind it.
//!
//! The pipeline is [`dsl`] → [`model::resolve`] → [`reasoner`] →
//! [`consistency`] / [`trace`] / [`export`].
//!
//! ```
//! use normspec::dsl::parse_spec_source;
//! use normspec::model::resolve;
//! use normspec::reasoner::{instantiate_scenario, Reasoner};
//!
//! let src = r#"
//! class Sign293 : L2_TrafficInfrastructure
//! zone EgoFront2Straight
//! fact Sign293_captured kind = capturing
//! maneuver KeepLane_Stop lateral = keep_lane longitudinal = stop
//! rule Capture: Sign293(?e), in_zone(?e, EgoFront2Straight) => applies(Sign293_captured)
//! rule Stop: applies(Sign293_captured) => maneuver(KeepLane_Stop)
//! scenario A {
//!     entity s293 : Sign293 in EgoFront2Straight
//! }
//! "#;
//! let parsed = parse_spec_source("example.nspec", src.as_bytes());
//! assert!(parsed.diagnostics.is_empty());
//! let model = resolve(&parsed.decls).unwrap();
//! let wm = instantiate_scenario(&model, &model.scenarios["A"]).unwrap();
//! let result = Reasoner::new(&model).infer(&wm);
//! let maneuvers: Vec<_> = result.applicable_maneuvers().into_iter().collect();
//! assert_eq!(maneuvers, ["KeepLane_Stop"]);
//! ```

pub mod consistency;
pub mod diag;
pub mod dsl;
pub mod export;
pub mod model;
pub mod reasoner;
pub mod trace;
