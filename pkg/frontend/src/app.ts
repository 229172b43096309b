// Play-view wiring: one session, one input stream, one in-flight turn at a
// time. The narration log only appends; the world panel is replaced
// wholesale from the state endpoint after every turn or generated item.

import { ApiClient, ApiError } from "./api.js";
import {
  diagnosticsEntry,
  errorEntry,
  narrationEntry,
  noticeEntry,
  worldPanel,
} from "./panels.js";

export interface PlayElements {
  log: HTMLElement;
  diagnostics: HTMLElement;
  world: HTMLElement;
  form: HTMLFormElement;
  input: HTMLInputElement;
  submit: HTMLButtonElement;
  genitemForm: HTMLFormElement;
  genitemBrief: HTMLInputElement;
  genitemButton: HTMLButtonElement;
}

export class PlayController {
  private inFlight = false;

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
    private readonly ui: PlayElements,
  ) {
    ui.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitAction(ui.input.value);
    });
    ui.genitemForm.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.generateItem(ui.genitemBrief.value);
    });
  }

  get busy(): boolean {
    return this.inFlight;
  }

  private setBusy(busy: boolean): void {
    this.inFlight = busy;
    this.ui.input.disabled = busy;
    this.ui.submit.disabled = busy;
    this.ui.genitemButton.disabled = busy;
  }

  async refreshWorld(): Promise<void> {
    const state = await this.api.getState(this.sessionId);
    this.ui.world.replaceChildren(worldPanel(state.scope));
  }

  async submitAction(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed || this.inFlight) {
      return; // empty input never leaves the client; one turn at a time
    }
    this.setBusy(true);
    try {
      const report = await this.api.runTurn(this.sessionId, trimmed);
      this.ui.input.value = "";
      this.ui.log.appendChild(narrationEntry(report.input, report.narration));
      this.ui.diagnostics.appendChild(diagnosticsEntry(report));
      await this.refreshWorld();
    } catch (error) {
      this.showError(error, "turn failed");
    } finally {
      this.setBusy(false);
      this.ui.log.scrollTop = this.ui.log.scrollHeight;
    }
  }

  async generateItem(brief: string): Promise<void> {
    if (this.inFlight) {
      return;
    }
    this.setBusy(true);
    try {
      const state = await this.api.getState(this.sessionId);
      const item = await this.api.generateItem(
        this.sessionId,
        state.scope.location.name,
        brief.trim(),
      );
      this.ui.genitemBrief.value = "";
      this.ui.log.appendChild(noticeEntry(`A new item appears nearby: ${item.name}`));
      await this.refreshWorld();
    } catch (error) {
      this.showError(error, "item generation failed");
    } finally {
      this.setBusy(false);
    }
  }

  private showError(error: unknown, context: string): void {
    if (error instanceof ApiError && error.isBusy) {
      this.ui.log.appendChild(noticeEntry("The session is busy with another turn; try again."));
      return;
    }
    const detail = error instanceof Error ? error.message : String(error);
    this.ui.log.appendChild(errorEntry(`${context}: ${detail}`));
  }
}

export function buildPlayView(root: HTMLElement): PlayElements {
  root.innerHTML = `
    <div class="play-layout">
      <section class="log-pane">
        <div id="narration-log" class="narration-log" aria-live="polite"></div>
        <form id="action-form" class="action-form">
          <input id="action-input" type="text" autocomplete="off"
                 placeholder="What do you do?" aria-label="player action" />
          <button id="action-submit" type="submit">Act</button>
        </form>
        <form id="genitem-form" class="genitem-form">
          <input id="genitem-brief" type="text" autocomplete="off"
                 placeholder="optional brief, e.g. something rusty" aria-label="item brief" />
          <button id="genitem-button" type="submit">Generate item</button>
        </form>
      </section>
      <aside class="side-pane">
        <section class="world-pane">
          <h2>World</h2>
          <div id="world-panel"></div>
        </section>
        <section class="diagnostics-pane">
          <h2>Turn diagnostics</h2>
          <div id="diagnostics"></div>
        </section>
      </aside>
    </div>`;
  return {
    log: root.querySelector("#narration-log") as HTMLElement,
    diagnostics: root.querySelector("#diagnostics") as HTMLElement,
    world: root.querySelector("#world-panel") as HTMLElement,
    form: root.querySelector("#action-form") as HTMLFormElement,
    input: root.querySelector("#action-input") as HTMLInputElement,
    submit: root.querySelector("#action-submit") as HTMLButtonElement,
    genitemForm: root.querySelector("#genitem-form") as HTMLFormElement,
    genitemBrief: root.querySelector("#genitem-brief") as HTMLInputElement,
    genitemButton: root.querySelector("#genitem-button") as HTMLButtonElement,
  };
}

export async function mountPlayView(
  root: HTMLElement,
  api: ApiClient,
  sessionId: string,
): Promise<PlayController> {
  const ui = buildPlayView(root);
  const controller = new PlayController(api, sessionId, ui);
  await controller.refreshWorld();
  return controller;
}

interface SetupElements {
  form: HTMLFormElement;
  baseUrl: HTMLInputElement;
  worldFile: HTMLInputElement;
  backendConfig: HTMLTextAreaElement;
  scriptFile: HTMLInputElement;
  status: HTMLElement;
}

function buildSetupView(root: HTMLElement): SetupElements {
  root.innerHTML = `
    <form id="setup-form" class="setup-form">
      <h2>Start a session</h2>
      <label>Service address
        <input id="base-url" type="text" value="http://127.0.0.1:8000" />
      </label>
      <label>World file (JSON)
        <input id="world-file" type="file" accept="application/json" required />
      </label>
      <label>Backend config (JSON; see docs/schemas.md)
        <textarea id="backend-config" rows="3">{"kind": "scripted"}</textarea>
      </label>
      <label>Scripted responses (JSON; required for a scripted backend)
        <input id="script-file" type="file" accept="application/json" />
      </label>
      <button type="submit">Play</button>
      <div id="setup-status" class="muted"></div>
    </form>`;
  return {
    form: root.querySelector("#setup-form") as HTMLFormElement,
    baseUrl: root.querySelector("#base-url") as HTMLInputElement,
    worldFile: root.querySelector("#world-file") as HTMLInputElement,
    backendConfig: root.querySelector("#backend-config") as HTMLTextAreaElement,
    scriptFile: root.querySelector("#script-file") as HTMLInputElement,
    status: root.querySelector("#setup-status") as HTMLElement,
  };
}

async function readJsonFile(input: HTMLInputElement): Promise<unknown | null> {
  const file = input.files?.[0];
  if (!file) {
    return null;
  }
  return JSON.parse(await file.text());
}

export function mountApp(root: HTMLElement): void {
  const setup = buildSetupView(root);
  setup.form.addEventListener("submit", (event) => {
    event.preventDefault();
    void (async () => {
      setup.status.textContent = "setting up...";
      try {
        const api = new ApiClient(setup.baseUrl.value);
        const worldDoc = await readJsonFile(setup.worldFile);
        if (worldDoc === null) {
          setup.status.textContent = "choose a world file first";
          return;
        }
        const backend = JSON.parse(setup.backendConfig.value) as Record<string, unknown>;
        const script = (await readJsonFile(setup.scriptFile)) as Record<
          string,
          string[]
        > | null;
        const worldId = await api.uploadWorld(worldDoc);
        const sessionId = await api.createSession(worldId, backend, script ?? undefined);
        await mountPlayView(root, api, sessionId);
      } catch (error) {
        const detail = error instanceof Error ? error.message : String(error);
        setup.status.textContent = `setup failed: ${detail}`;
      }
    })();
  });
}

declare global {
  interface Window {
    fabularMountApp?: typeof mountApp;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.fabularMountApp = mountApp;
  const root = document.getElementById("app");
  if (root) {
    mountApp(root);
  }
}
