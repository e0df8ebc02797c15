use tetherplan::scene::{load_scene, Scene, DEFAULT_SCENE};
use tetherplan::Error;
use tetherplan_core::presets;
use tetherplan_core::robot::Arm;

fn with_line_replaced(from: &str, to: &str) -> String {
    assert!(DEFAULT_SCENE.contains(from), "default scene lacks {from:?}");
    DEFAULT_SCENE.replacen(from, to, 1)
}

#[test]
fn bundled_scene_is_the_preset_cell() {
    let scene = Scene::default_scene().unwrap();
    let cell = presets::default_workcell();
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    for arm in Arm::BOTH {
        let (s, p) = (scene.cell.robot.arm(arm), cell.robot.arm(arm));
        assert!(s.base.approx_eq(&p.base, 1e-12, 1e-12));
        for j in 0..6 {
            assert!(close(scene.cell.home[arm.index()].0[j], cell.home[arm.index()].0[j]));
        }
    }
    assert!((scene.cell.balancer.anchor - cell.balancer.anchor).norm() < 1e-12);
    assert!(close(scene.cell.balancer.max_load, cell.balancer.max_load));
    assert!(scene.task.start.approx_eq(&presets::baseline_start(), 1e-12, 1e-12));
    assert!(scene.task.goal.approx_eq(&presets::baseline_goal(), 1e-12, 1e-12));
    assert_eq!(scene.cell.handover_poses.len(), cell.handover_poses.len());
    for (a, b) in scene.cell.handover_poses.iter().zip(&cell.handover_poses) {
        assert!(a.approx_eq(b, 1e-12, 1e-12));
    }
    assert_eq!(scene.cell.tool.shapes, cell.tool.shapes);
    assert_eq!(scene.cell.collision.statics(), cell.collision.statics());
    assert_eq!(scene.grid.pitch_deg.len() * scene.grid.roll_deg.len(), 40);
    assert_eq!(scene.planner.bend.theta_max, 95f64.to_radians());
    assert_eq!(scene.time_limit, Some(std::time::Duration::from_secs(60)));
}

#[test]
fn zero_threshold_is_a_validation_error() {
    let text = with_line_replaced("theta_max_deg = 95.0", "theta_max_deg = 0.0");
    match Scene::from_toml_str(&text, "test.toml") {
        Err(Error::Validation { field, .. }) => assert_eq!(field, "planner.theta_max_deg"),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn unknown_key_is_a_parse_error_with_position() {
    let text = with_line_replaced("max_load_kg = 2.0", "max_load_kg = 2.0\nspring_rate = 3.0");
    match Scene::from_toml_str(&text, "test.toml") {
        Err(e @ Error::Parse { .. }) => {
            let msg = e.to_string();
            assert!(msg.contains("spring_rate"), "{msg}");
            assert!(msg.contains("line"), "{msg}");
            assert!(msg.starts_with("test.toml"), "{msg}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn malformed_toml_is_a_parse_error() {
    assert!(matches!(Scene::from_toml_str("[robot\nmodel = ", "x"), Err(Error::Parse { .. })));
}

#[test]
fn tilted_start_is_rejected() {
    let text = with_line_replaced(
        "start = { position = [0.32, 0.35, 0.30] }",
        "start = { position = [0.32, 0.35, 0.30], rpy_deg = [5.0, 0.0, 0.0] }",
    );
    match Scene::from_toml_str(&text, "t") {
        Err(Error::Validation { field, .. }) => assert!(field.starts_with("task.start")),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn unknown_robot_and_bad_shapes_name_the_field() {
    let text = with_line_replaced("model = \"ur3\"", "model = \"ur5\"");
    assert!(matches!(Scene::from_toml_str(&text, "t"), Err(Error::Validation { field, .. }) if field == "robot.model"));
    let text = with_line_replaced("cable_radius = 0.01", "cable_radius = -0.01");
    assert!(matches!(Scene::from_toml_str(&text, "t"), Err(Error::Validation { field, .. }) if field.starts_with("balancer")));
}

#[test]
fn omitted_planner_table_takes_defaults() {
    let start = DEFAULT_SCENE.find("[planner]").unwrap();
    let end = DEFAULT_SCENE.find("[sweep]").unwrap();
    let text = format!("{}{}", &DEFAULT_SCENE[..start], &DEFAULT_SCENE[end..]);
    let scene = Scene::from_toml_str(&text, "t").unwrap();
    assert_eq!(scene.file.planner, Default::default());
    // The echo shows every default and parses back to the same scene.
    let echo = scene.echo();
    assert!(echo.contains("max_validated_edges = 20000"), "{echo}");
    let again = Scene::from_toml_str(&echo, "echo").unwrap();
    assert_eq!(again.file, scene.file);
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_scene(std::path::Path::new("/nonexistent/scene.toml")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(Scene::load("default").is_ok());
}

#[test]
fn cell_offsets_roll_the_start_and_pitch_the_goal() {
    let scene = Scene::default_scene().unwrap();
    let t = tetherplan::sweep::cell_task(&scene, 30.0, -10.0);
    let theta = |p| tetherplan_core::cable::bend_angle(p, &scene.cell.tool, &scene.cell.balancer).unwrap();
    assert!((theta(&t.start).to_degrees() - 10.0).abs() < 1e-9);
    assert!((theta(&t.goal).to_degrees() - 55.0).abs() < 1e-9);
    assert_eq!(t.start.translation, scene.task.start.translation);
}
