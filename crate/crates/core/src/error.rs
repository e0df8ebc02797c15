use thiserror::Error;

/// Errors raised by the planning library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector norm below 1e-12")]
    ZeroVector,
    #[error("inverse kinematics found no solution")]
    NoSolution,
    #[error("cable anchor coincides with the tool connector point")]
    DegenerateCable,
    #[error("tool handle is shorter than the gripper finger width")]
    EmptyGraspSet,
    #[error("no start grasp passed IK, collision and constraint checks")]
    NoFeasibleStartGrasp,
    #[error("no goal grasp passed IK, collision and constraint checks")]
    NoFeasibleGoalGrasp,
    #[error("torque trace has no holding waypoints")]
    EmptyTrace,
    #[error("invalid scene: {0}")]
    InvalidScene(alloc::string::String),
}
