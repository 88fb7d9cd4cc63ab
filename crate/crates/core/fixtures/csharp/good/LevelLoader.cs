#if UNITY_EDITOR
using UnityEditor;
#endif
using System.Collections;
using UnityEngine;
using UnityEngine.SceneManagement;

public class LevelLoader : MonoBehaviour
{
    [SerializeField] private string[] levels = { "Forest", "Caves", "Castle" };
    [SerializeField] private float fadeSeconds = 0.5f;

    private int current;

    public void LoadNext()
    {
        current = (current + 1) % levels.Length;
        StartCoroutine(Load(levels[current]));
    }

    private IEnumerator Load(string scene)
    {
        yield return new WaitForSeconds(fadeSeconds);
        AsyncOperation op = SceneManager.LoadSceneAsync(scene);
        while (!op.isDone)
        {
            yield return null;
        }
#if UNITY_EDITOR
        EditorApplication.Beep();
#endif
    }
}
