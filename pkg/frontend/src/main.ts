import { ApiClient } from "./api.js";
import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8420";
const scene = params.get("scene") ?? "table1.json";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const app = new App(root, new ApiClient(baseUrl), baseUrl);
app.render();
const existing = params.get("session");
void (existing ? app.attach(existing) : app.start(scene));
