// expect: MarkdownFenceArtifact
```csharp
using UnityEngine;

public class Door : MonoBehaviour
{
    public void Open() { gameObject.SetActive(false); }
}
```
