/**
 * Session state: bearer token and role survive reloads via
 * sessionStorage, and mutations are serialized so the UI never has two
 * writes racing against the single-writer store.
 */

import { ApiClient } from "./api.js";

const TOKEN_KEY = "sia.token";
const ROLE_KEY = "sia.role";

interface TokenStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export class Session {
  readonly api: ApiClient;
  private storage: TokenStore;

  constructor(api: ApiClient, storage: TokenStore) {
    this.api = api;
    this.storage = storage;
    api.token = storage.getItem(TOKEN_KEY);
    api.role = storage.getItem(ROLE_KEY);
  }

  get loggedIn(): boolean {
    return this.api.token !== null;
  }

  get isExpert(): boolean {
    return this.api.isExpert;
  }

  get role(): string | null {
    return this.api.role;
  }

  async login(username: string, password: string): Promise<void> {
    await this.api.login(username, password);
    this.storage.setItem(TOKEN_KEY, this.api.token ?? "");
    this.storage.setItem(ROLE_KEY, this.api.role ?? "");
  }

  async logout(): Promise<void> {
    try {
      await this.api.logout();
    } finally {
      this.clear();
    }
  }

  /** Drop credentials locally, e.g. after the service reports 401. */
  clear(): void {
    this.api.token = null;
    this.api.role = null;
    this.storage.removeItem(TOKEN_KEY);
    this.storage.removeItem(ROLE_KEY);
  }
}

/** Allows one mutation at a time; further attempts are refused until the
 * running one settles rather than queued behind it. */
export class MutationGate {
  private busy = false;

  get inFlight(): boolean {
    return this.busy;
  }

  async run<T>(operation: () => Promise<T>): Promise<T> {
    if (this.busy) throw new Error("another change is still being saved");
    this.busy = true;
    try {
      return await operation();
    } finally {
      this.busy = false;
    }
  }
}
