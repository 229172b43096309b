"""Grounded interactive storytelling.

A language model predicts the outcomes of free-text player actions; this
engine renders a minimal structured world into the prompt, parses the
predicted changes, rejects whatever contradicts the world, and applies the
rest. The structured state is the single source of truth: narration can be
as wild as the model likes, the world stays consistent.
"""

from .changes import (
    Drop,
    Give,
    Move,
    NoChange,
    Reason,
    Rejection,
    Take,
    Unblock,
    WorldChange,
    apply_changes,
    format_change,
    parse_changes,
    validate_change,
)
from .gateway import (
    BackendConfig,
    GenerationError,
    PromptBundle,
    ScriptedBackend,
    build_item_prompt,
    build_narrator_prompt,
    build_update_prompt,
    default_fewshot,
    generate,
    make_backend,
)
from .generation import ItemGenerationError, generate_item
from .render import RenderedState, TemplateTable, render_changes, render_state
from .session import (
    Session,
    SessionBusyError,
    TurnError,
    TurnReport,
    load_session,
    replay_applied,
    save_session,
)
from .world import (
    Character,
    Item,
    Location,
    ScopeSet,
    Violation,
    World,
    WorldFileError,
    asymmetry_warnings,
    from_document,
    key_of,
    load_world,
    save_world,
    scope_of,
    to_document,
    validate_world,
    world_digest,
)

__version__ = "0.1.0"
