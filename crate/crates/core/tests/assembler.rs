use std::path::PathBuf;

use craft_core::assembler::{
    carve_modifications, connectivity_check, place_parts, resolve_orientation, Assembly,
    HoleSection, PlacementError,
};
use craft_core::catalog::{Catalog, ObjectType};
use craft_core::geometry::{Axis, Primitive, Vec3};
use craft_core::plan::tokens::Align;
use craft_core::plan::{parse_plan, Contact, CraftPlan, Orientation, PartSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

fn fixture(rel: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/plans").join(rel);
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn plan(v: &Value) -> CraftPlan {
    parse_plan(v, &Catalog::default_catalog()).unwrap()
}

fn build(v: &Value) -> Assembly {
    place_parts(&plan(v), &Catalog::default_catalog()).unwrap()
}

fn close(a: Vec3, b: Vec3) -> bool {
    (a - b).amax() < 1e-12
}

const GOLDEN: [&str; 6] = [
    "valid/table_1.json",
    "valid/hammer_1.json",
    "valid/skateboard_1.json",
    "valid/chair_1.json",
    "valid/bookshelf_1.json",
    "valid/bus_1.json",
];

#[test]
fn orientation_resolution() {
    let spec = |orientation| PartSpec {
        name: "LEG_1".into(),
        available_obj: "X".into(),
        orientation,
        modifications: vec![],
        connections: vec![],
        exec_function: false,
    };
    let cyl = ObjectType::cylinder("CYLINDER_R20_L100", 20.0, 100.0);
    let r = resolve_orientation(&spec(Orientation::Cylinder(Axis::Z)), &cyl.shape);
    assert!(close(r.extents, Vec3::new(0.04, 0.04, 0.10)));
    assert_eq!(r.principal_axis(), Axis::Z);

    let bar = ObjectType::cuboid("CUBOID_200x40x20", [200.0, 40.0, 20.0]);
    let r = resolve_orientation(&spec(Orientation::Cuboid([20.0, 200.0, 40.0])), &bar.shape);
    assert!(close(r.extents, Vec3::new(0.02, 0.20, 0.04)));
    assert_eq!(r.principal_axis(), Axis::Y);
    let r = resolve_orientation(&spec(Orientation::Cuboid([200.0, 40.0, 20.0])), &bar.shape);
    assert!(close(r.extents, Vec3::new(0.2, 0.04, 0.02)));
}

#[test]
fn single_part_sits_at_origin() {
    let v = json!([{"NAME": "BLOCK_1", "AVAILABLE_OBJ": "CUBOID_60x60x60", "ORIENTATION": [60, 60, 60],
                    "CONNECTIONS": [], "EXEC_FUNCTION": true}]);
    let a = build(&v);
    assert!(close(a.parts[0].position, Vec3::new(0.0, 0.0, 0.03)));
    assert_eq!(a.ground_set, vec!["BLOCK_1"]);
}

#[test]
fn table_legs_hang_flush_under_corners() {
    let a = build(&fixture("valid/table_1.json"));
    let top = a.part("TABLETOP_1").unwrap().aabb();
    let leg = a.part("LEG_1").unwrap().aabb();
    // LEG_1: FRONT, LEFT.
    assert_eq!(leg.max.z, top.min.z);
    assert!((leg.max.x - top.max.x).abs() < 1e-12);
    assert!((leg.max.y - top.max.y).abs() < 1e-12);
    let leg4 = a.part("LEG_4").unwrap().aabb();
    assert!((leg4.min.x - top.min.x).abs() < 1e-12);
    assert!((leg4.min.y - top.min.y).abs() < 1e-12);
    // Legs are the lowest parts and rest on the ground.
    assert_eq!(a.ground_set, vec!["LEG_1", "LEG_2", "LEG_3", "LEG_4"]);
    assert!((top.min.z - 0.1).abs() < 1e-12);
}

#[test]
fn skateboard_axle_sits_in_wheel_hole() {
    let a = build(&fixture("valid/skateboard_1.json"));
    // Hand computation: wheels (r = 20 mm) hang from 30 mm supports under
    // a 10 mm deck, so wheel bottoms are 35 mm below the deck bottom. After
    // grounding, support centers sit at z = 35 - 15 = 20 mm. Supports are
    // 60 mm deep, flush with the deck's front (x = 100 mm): center x = 70.
    let axle = a.part("AXLE_1").unwrap();
    assert!(close(axle.position, Vec3::new(0.07, 0.0, 0.02)));
    let wheel = a.part("WHEEL_1").unwrap();
    let hole = wheel.hole("HOLE_1").unwrap();
    assert_eq!(hole.axis, Axis::Y);
    assert!(hole.through);
    assert!(close(hole.center, Vec3::new(0.07, 0.05, 0.02)));
    assert_eq!(hole.section, HoleSection::Round { radius: 0.006 });
    let wheel2 = a.part("WHEEL_2").unwrap();
    assert!(close(wheel2.position, Vec3::new(0.07, -0.05, 0.02)));
    assert_eq!(
        a.ground_set,
        vec!["WHEEL_1", "WHEEL_2", "WHEEL_3", "WHEEL_4"]
    );
}

#[test]
fn inserted_handle_gets_clearance_hole() {
    let a = build(&fixture("valid/hammer_3.json"));
    let head = a.part("HEAD_1").unwrap();
    let hole = head.hole("HOLE_1").unwrap();
    let HoleSection::Round { radius } = hole.section else {
        panic!("expected a round hole");
    };
    assert!((radius - 0.011).abs() < 1e-15);
    assert!((hole.depth - 0.04).abs() < 1e-15);
    let handle = a.part("HANDLE_1").unwrap();
    assert!(close(handle.position.xy().push(0.0), hole.center.xy().push(0.0)));
}

#[test]
fn half_hole_starts_at_named_face() {
    let v = json!([{"NAME": "BLOCK_1", "AVAILABLE_OBJ": "CUBOID_100x100x20", "ORIENTATION": [100, 20, 100],
                    "MODIFICATIONS": [{"NAME": "HOLE_1", "TYPE": "HOLE", "ALIGN_X": "FRONT",
                                       "ALIGN_Y": "CENTER", "ALIGN_Z": "LOW_HIGH_HALF"}],
                    "CONNECTIONS": [], "EXEC_FUNCTION": true}]);
    let a = build(&v);
    let hole = &a.parts[0].holes[0];
    assert!(!hole.through);
    assert!((hole.depth - 0.05).abs() < 1e-15);
    // Bottom face at z = 0, so the hole spans [0, 0.05]; FRONT is the
    // quarter point x = 0.1 / 4.
    assert!(close(hole.center, Vec3::new(0.025, 0.0, 0.025)));
    assert_eq!(hole.section, HoleSection::Round { radius: 0.005 });
}

#[test]
fn compilation_is_byte_identical() {
    for f in GOLDEN {
        let v = fixture(f);
        assert_eq!(build(&v).to_json_string(), build(&v).to_json_string(), "{f}");
    }
}

#[test]
fn alignment_tokens_hold_on_golden_fixtures() {
    for f in GOLDEN {
        let a = build(&fixture(f));
        for e in &a.edges {
            let Contact::Surface { to_face, align } = &e.connection.contact else {
                continue;
            };
            let (p, t) = (&a.parts[e.from], &a.parts[e.to]);
            let (u, v) = to_face.axis.others();
            for axis in [u, v] {
                let k = axis.index();
                match align[k] {
                    Align::Center => assert!(
                        (p.position[k] - t.position[k]).abs() <= 1e-12,
                        "{f}: {} vs {}",
                        p.name(),
                        t.name()
                    ),
                    Align::Flush(side) => {
                        let s = side.sign();
                        let mine = p.position[k] + s * p.half()[k];
                        let theirs = t.position[k] + s * t.half()[k];
                        assert!((mine - theirs).abs() <= 1e-12, "{f}: {}", p.name());
                    }
                }
            }
        }
    }
}

#[test]
fn left_right_mirror_reflects_the_chair() {
    let p = plan(&fixture("valid/chair_1.json"));
    let catalog = Catalog::default_catalog();
    let a = place_parts(&p, &catalog).unwrap();
    let m = place_parts(&p.mirrored_left_right(), &catalog).unwrap();
    let flip = |v: Vec3| Vec3::new(v.x, -v.y, v.z);
    for (x, y) in a.parts.iter().zip(&m.parts) {
        assert_eq!(flip(x.position), y.position, "{}", x.name());
        for (h, g) in x.holes.iter().zip(&y.holes) {
            assert_eq!(flip(h.center), g.center);
        }
    }
    // The mirror is a different assembly, not a no-op.
    assert_ne!(a.part("LEG_1").unwrap().position, m.part("LEG_1").unwrap().position);
}

#[test]
fn inserted_parts_stay_inside_their_holes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in ["valid/skateboard_1.json", "valid/bus_1.json", "valid/hammer_3.json"] {
        let a = build(&fixture(f));
        for e in &a.edges {
            let Contact::Inserted { to_modification } = &e.connection.contact else {
                continue;
            };
            let part = &a.parts[e.from];
            let host = &a.parts[e.to];
            let hole = host.hole(to_modification).unwrap().primitive();
            let region = part.aabb().intersection(&host.aabb());
            let base = part.base();
            let mut checked = 0;
            while checked < 10_000 {
                let p = Vec3::from_fn(|k, _| rng.gen_range(region.min[k]..=region.max[k]));
                if !base.contains(&p) {
                    continue;
                }
                checked += 1;
                assert!(hole.contains(&p), "{f}: {} escapes {}", part.name(), host.name());
            }
        }
    }
}

#[test]
fn recarving_is_a_fixed_point() {
    let v = fixture("valid/bus_1.json");
    let a = build(&v);
    assert_eq!(carve_modifications(&a, &plan(&v)).unwrap(), a);
}

#[test]
fn connectivity_of_fixtures() {
    for f in GOLDEN {
        assert!(connectivity_check(&build(&fixture(f))).is_ok(), "{f}");
    }
    let a = build(&fixture("geometry/table_with_loose_part.json"));
    let err = connectivity_check(&a).unwrap_err();
    assert_eq!(
        err.components,
        vec![
            vec!["TABLETOP_1", "LEG_1", "LEG_2", "LEG_3", "LEG_4"],
            vec!["LAMP_1"]
        ]
    );
    // The loose part is parked beside the assembly, not inside it.
    let lamp = a.part("LAMP_1").unwrap().aabb();
    assert!(lamp.min.y > a.part("TABLETOP_1").unwrap().aabb().max.y);

    let two = json!([
        {"NAME": "A_1", "AVAILABLE_OBJ": "CUBOID_30x30x30", "ORIENTATION": [30, 30, 30], "CONNECTIONS": [], "EXEC_FUNCTION": true},
        {"NAME": "B_1", "AVAILABLE_OBJ": "CUBOID_30x30x30", "ORIENTATION": [30, 30, 30], "CONNECTIONS": [], "EXEC_FUNCTION": false}
    ]);
    assert_eq!(connectivity_check(&build(&two)).unwrap_err().components.len(), 2);
}

fn place_err(v: Value) -> PlacementError {
    place_parts(&plan(&v), &Catalog::default_catalog()).unwrap_err()
}

#[test]
fn misaligned_insertion_is_unplaceable() {
    let v = json!([
        {"NAME": "BODY_1", "AVAILABLE_OBJ": "CUBOID_250x100x50", "ORIENTATION": [250, 100, 50],
         "MODIFICATIONS": [{"NAME": "HOLE_1", "TYPE": "HOLE", "ALIGN_X": "FRONT", "ALIGN_Y": "RIGHT_LEFT_FULL", "ALIGN_Z": "LOW"}],
         "CONNECTIONS": [], "EXEC_FUNCTION": false},
        {"NAME": "AXLE_1", "AVAILABLE_OBJ": "CYLINDER_R5_L150", "ORIENTATION": "FRONT_BACK",
         "CONNECTIONS": [{"TO_PART": "BODY_1", "CONTACT_TYPE": "INSERTED", "TO_MODIFICATION": "HOLE_1"}],
         "EXEC_FUNCTION": true}
    ]);
    assert!(matches!(place_err(v), PlacementError::Unplaceable { part, .. } if part == "AXLE_1"));
}

#[test]
fn oversized_hole_is_rejected() {
    let v = json!([
        {"NAME": "PLATE_1", "AVAILABLE_OBJ": "CUBOID_50x50x10", "ORIENTATION": [50, 50, 10],
         "MODIFICATIONS": [{"NAME": "HOLE_1", "TYPE": "HOLE", "ALIGN_X": "FRONT_BACK_FULL", "ALIGN_Y": "CENTER", "ALIGN_Z": "CENTER"}],
         "CONNECTIONS": [], "EXEC_FUNCTION": false},
        {"NAME": "ROD_1", "AVAILABLE_OBJ": "CYLINDER_R5_L80", "ORIENTATION": "FRONT_BACK",
         "CONNECTIONS": [{"TO_PART": "PLATE_1", "CONTACT_TYPE": "INSERTED", "TO_MODIFICATION": "HOLE_1"}],
         "EXEC_FUNCTION": true}
    ]);
    assert_eq!(
        place_err(v),
        PlacementError::HoleExceedsOwner {
            part: "PLATE_1".into(),
            modification: "HOLE_1".into()
        }
    );
}

#[test]
fn contradictory_second_connection_is_inconsistent() {
    let mut v = fixture("valid/table_1.json");
    v[2]["CONNECTIONS"]
        .as_array_mut()
        .unwrap()
        .push(json!({"TO_PART": "LEG_1", "CONTACT_TYPE": "SURFACE", "TO_FACE": "FRONT",
                     "ALIGN_X": "CENTER", "ALIGN_Y": "CENTER", "ALIGN_Z": "CENTER"}));
    assert!(matches!(
        place_err(v),
        PlacementError::InconsistentConnection { part, to_part, .. } if part == "LEG_2" && to_part == "LEG_1"
    ));
}

#[test]
fn insertion_into_unreachable_part() {
    let cube = |name: &str, conn: Value| {
        json!({"NAME": name, "AVAILABLE_OBJ": "CUBOID_60x60x60", "ORIENTATION": [60, 60, 60],
               "MODIFICATIONS": [{"NAME": "HOLE_1", "TYPE": "HOLE", "ALIGN_X": "CENTER", "ALIGN_Y": "CENTER", "ALIGN_Z": "HIGH_LOW_FULL"}],
               "CONNECTIONS": [conn], "EXEC_FUNCTION": false})
    };
    let surface = |to: &str| json!({"TO_PART": to, "CONTACT_TYPE": "SURFACE", "TO_FACE": "BOTTOM",
                                    "ALIGN_X": "CENTER", "ALIGN_Y": "CENTER", "ALIGN_Z": "CENTER"});
    let v = json!([
        cube("A_1", surface("B_1")),
        cube("B_1", surface("A_1")),
        {"NAME": "PIN_1", "AVAILABLE_OBJ": "CYLINDER_R5_L80", "ORIENTATION": "TOP_BOTTOM",
         "CONNECTIONS": [{"TO_PART": "D_1", "CONTACT_TYPE": "INSERTED", "TO_MODIFICATION": "HOLE_1"}],
         "EXEC_FUNCTION": true},
        cube("D_1", surface("PIN_1")),
    ]);
    assert!(matches!(place_err(v), PlacementError::HoleNotCarvedYet { part, .. } if part == "PIN_1"));
}

#[test]
fn every_valid_fixture_compiles() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/plans/valid");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let a = build(&v);
        assert!(connectivity_check(&a).is_ok(), "{}", path.display());
        for p in &a.parts {
            assert!(p.position.iter().all(|c| c.is_finite()));
            if let Primitive::Cylinder { radius, .. } = p.base() {
                assert!(radius > 0.0);
            }
        }
    }
}
