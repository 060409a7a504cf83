"""Peg-transfer world: board, posts, pegs, tool, and grasp heuristics.

Two instances exist per trial, one driven by the remote command stream and
one by the twin stream. Kinematics are ideal-servo (the tool lands exactly
on each commanded pose, no dynamics), which keeps the world deterministic:
identical command sequences always produce identical scenes, so the remote
re-derives the twin's grasp events from the replayed commands.

Grasping is heuristic: a jaw closing near a free peg's grasp point picks it
up, and the peg then rides at a fixed offset from the gripper. Opening the
jaw over a free post snaps the peg onto it; opening anywhere else drops the
peg in place, where it can be regrasped.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .controller import ToolCommand
from .geometry import Pose, Rotation, Vec3, compose_pose

JAW_OPEN = 0.8
JAW_CLOSED = 0.0


class BoardMismatchError(ValueError):
    """Scene comparison across different board geometry."""


class Side(Enum):
    LEFT = "left"
    RIGHT = "right"


class PegLocation(Enum):
    ON_POST = "on_post"
    HELD = "held"
    DROPPED = "dropped"


class TaskPhase(Enum):
    LEFT_TO_RIGHT = "left_to_right"
    RIGHT_TO_LEFT = "right_to_left"
    DONE = "done"


@dataclass(frozen=True, slots=True)
class Post:
    id: str
    position: Vec3  # grasp-height point above the post
    side: Side


@dataclass(frozen=True)
class Board:
    posts: tuple[Post, ...]
    capture_radius: float = 0.02
    plane_height: float = 0.0

    def __post_init__(self) -> None:
        seen = set()
        for p in self.posts:
            key = p.position.as_tuple()
            if key in seen:
                raise ValueError(f"post positions must be distinct, duplicate at {key}")
            seen.add(key)
        lefts = sum(1 for p in self.posts if p.side is Side.LEFT)
        if lefts * 2 != len(self.posts):
            raise ValueError("board must have equal post counts per side")

    def post(self, post_id: str) -> Post:
        for p in self.posts:
            if p.id == post_id:
                return p
        raise KeyError(post_id)

    def side_posts(self, side: Side) -> list[Post]:
        return [p for p in self.posts if p.side is side]


@dataclass(frozen=True, slots=True)
class GraspParams:
    grasp_radius: float = 0.003
    jaw_close_threshold: float = 0.2
    jaw_open_threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.jaw_open_threshold <= self.jaw_close_threshold:
            raise ValueError("open threshold must exceed close threshold (hysteresis)")
        if self.grasp_radius <= 0:
            raise ValueError("grasp radius must be positive")


@dataclass(slots=True)
class Peg:
    id: str
    location: PegLocation
    post_id: str | None = None
    dropped_position: Vec3 | None = None
    grasp_offset: Pose = field(default_factory=Pose.identity)

    def copy(self) -> "Peg":
        return replace(self)


@dataclass(frozen=True, slots=True)
class Tool:
    pose: Pose
    jaw: float


@dataclass(slots=True)
class SceneState:
    board: Board
    pegs: list[Peg]
    tool: Tool | None
    phase: TaskPhase = TaskPhase.LEFT_TO_RIGHT
    last_jaw: float = JAW_OPEN  # jaw value at the previous grasp update, for hysteresis

    def copy(self) -> "SceneState":
        return SceneState(
            board=self.board,
            pegs=[p.copy() for p in self.pegs],
            tool=self.tool,
            phase=self.phase,
            last_jaw=self.last_jaw,
        )

    def peg(self, peg_id: str) -> Peg:
        for p in self.pegs:
            if p.id == peg_id:
                return p
        raise KeyError(peg_id)

    def held_peg(self) -> Peg | None:
        for p in self.pegs:
            if p.location is PegLocation.HELD:
                return p
        return None

    def post_occupied(self, post_id: str) -> bool:
        return any(p.location is PegLocation.ON_POST and p.post_id == post_id for p in self.pegs)


@dataclass(frozen=True, slots=True)
class PegGrasped:
    peg_id: str


@dataclass(frozen=True, slots=True)
class PegPlaced:
    peg_id: str
    post_id: str


@dataclass(frozen=True, slots=True)
class PegDropped:
    peg_id: str
    position: Vec3


SceneEvent = PegGrasped | PegPlaced | PegDropped


def peg_position(scene: SceneState, peg: Peg) -> Vec3:
    """Reference point of a peg regardless of where it currently lives."""
    if peg.location is PegLocation.ON_POST:
        return scene.board.post(peg.post_id).position
    if peg.location is PegLocation.HELD:
        if scene.tool is None:
            raise ValueError(f"peg {peg.id} held but scene has no tool")
        return compose_pose(scene.tool.pose, peg.grasp_offset).position
    return peg.dropped_position


def apply_command(scene: SceneState, cmd: ToolCommand) -> SceneState:
    """Ideal servo: the tool lands on the commanded pose and jaw."""
    scene.tool = Tool(cmd.pose, cmd.jaw)
    return scene


def update_grasp(scene: SceneState, params: GraspParams) -> list[SceneEvent]:
    """Apply the grasp/release heuristic to the current tool state."""
    if scene.tool is None:
        return []
    jaw = scene.tool.jaw
    events: list[SceneEvent] = []
    held = scene.held_peg()

    if held is None and scene.last_jaw >= params.jaw_close_threshold > jaw:
        tip = scene.tool.pose.position
        best: Peg | None = None
        best_dist = params.grasp_radius
        for peg in scene.pegs:
            if peg.location is PegLocation.HELD:
                continue
            d = tip.distance_to(peg_position(scene, peg))
            if d <= best_dist:
                best = peg
                best_dist = d
        if best is not None:
            best.location = PegLocation.HELD
            best.post_id = None
            best.dropped_position = None
            events.append(PegGrasped(best.id))
    elif held is not None and scene.last_jaw <= params.jaw_open_threshold < jaw:
        tip = scene.tool.pose.position
        target: Post | None = None
        target_dist = scene.board.capture_radius
        for post in scene.board.posts:
            if scene.post_occupied(post.id):
                continue
            d = tip.distance_to(post.position)
            if d <= target_dist:
                target = post
                target_dist = d
        if target is not None:
            held.location = PegLocation.ON_POST
            held.post_id = target.id
            held.dropped_position = None
            events.append(PegPlaced(held.id, target.id))
        else:
            pos = peg_position(scene, held)
            held.location = PegLocation.DROPPED
            held.post_id = None
            held.dropped_position = pos
            events.append(PegDropped(held.id, pos))

    scene.last_jaw = jaw
    return events


def task_complete(scene: SceneState) -> bool:
    """Advance the transfer phase if its goal is met; True once both legs are done."""
    if scene.phase is TaskPhase.DONE:
        return True

    def all_on(side: Side) -> bool:
        return all(
            p.location is PegLocation.ON_POST and scene.board.post(p.post_id).side is side
            for p in scene.pegs
        )

    if scene.phase is TaskPhase.LEFT_TO_RIGHT and all_on(Side.RIGHT):
        scene.phase = TaskPhase.RIGHT_TO_LEFT
        return False
    if scene.phase is TaskPhase.RIGHT_TO_LEFT and all_on(Side.LEFT):
        scene.phase = TaskPhase.DONE
        return True
    return False


@dataclass(frozen=True)
class SceneLayout:
    """Declarative board description: posts, peg start posts, radii."""

    posts: tuple[Post, ...]
    peg_start_posts: tuple[tuple[str, str], ...]  # (peg_id, post_id)
    capture_radius: float = 0.02
    plane_height: float = 0.0
    grasp: GraspParams = field(default_factory=GraspParams)
    grasp_offset: Pose = field(default_factory=Pose.identity)
    tool_start: Vec3 = Vec3(0.0, 0.0, 0.04)
    approach_height: float = 0.03  # clearance above grasp points while traversing

    def board(self) -> Board:
        return Board(self.posts, self.capture_radius, self.plane_height)


def default_layout() -> SceneLayout:
    """Desk-scale 3+3 board; posts carry grasp-height points 1 cm above the plane."""
    posts = []
    for i, y in enumerate((-0.025, 0.0, 0.025), start=1):
        posts.append(Post(f"L{i}", Vec3(-0.04, y, 0.01), Side.LEFT))
    for i, y in enumerate((-0.025, 0.0, 0.025), start=1):
        posts.append(Post(f"R{i}", Vec3(0.04, y, 0.01), Side.RIGHT))
    return SceneLayout(
        posts=tuple(posts),
        peg_start_posts=(("p1", "L1"), ("p2", "L2"), ("p3", "L3")),
    )


def build_scene(layout: SceneLayout) -> SceneState:
    board = layout.board()
    pegs = []
    for peg_id, post_id in layout.peg_start_posts:
        board.post(post_id)  # validate reference
        pegs.append(Peg(peg_id, PegLocation.ON_POST, post_id=post_id, grasp_offset=layout.grasp_offset))
    tool = Tool(Pose(layout.tool_start, Rotation.identity()), JAW_OPEN)
    return SceneState(board=board, pegs=pegs, tool=tool)


def scene_divergence(remote: SceneState, twin: SceneState) -> float:
    """Largest positional gap between the two scenes, meters."""
    if remote.board != twin.board:
        raise BoardMismatchError("scenes do not share board geometry")
    worst = 0.0
    if (remote.tool is None) != (twin.tool is None):
        raise ValueError("scenes disagree on tool presence")
    if remote.tool is not None:
        worst = remote.tool.pose.position.distance_to(twin.tool.pose.position)
    for r_peg in remote.pegs:
        t_peg = twin.peg(r_peg.id)
        d = peg_position(remote, r_peg).distance_to(peg_position(twin, t_peg))
        if d > worst:
            worst = d
    return worst
